#pragma once

// Configuration-driven entry point. A single JSON file selects the subcommand
// and all numeric inputs; outputs are machine-readable files in out_dir.
// Exit codes: 0 ok, 1 config/validation, 2 numerical failure, 3 hypothesis
// failure. Every failure is also recorded as out_dir/error.json.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyporb/asymptotics.hpp"
#include "hyporb/continuation.hpp"
#include "hyporb/errors.hpp"
#include "hyporb/io.hpp"
#include "hyporb/minimize.hpp"
#include "hyporb/orbit.hpp"
#include "hyporb/potential.hpp"

namespace hyporb {

namespace cli {

inline std::string format_radius(double r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", r);
    return buf;
}

inline Potential parse_potential(const json& j) {
    if (!j.contains("family")) throw validation_error("potential.family is required");
    const std::string family = j.at("family").get<std::string>();
    const int dim = j.value("dim", 2);
    Potential p;
    if (family == "power-law") {
        if (!j.contains("alpha")) throw validation_error("power-law needs potential.alpha");
        p = make_power_law(j.at("alpha").get<double>(), dim);
    } else if (family == "log-blend") {
        p = make_log_blend(dim);
    } else if (family == "kepler-test") {
        p = make_kepler_test(dim);
    } else {
        throw validation_error("unknown potential family: " + family);
    }
    if (j.contains("beta") || j.contains("m0") || j.contains("r0")) {
        DecayBound d = p.decay.value_or(DecayBound{});
        d.beta = j.value("beta", d.beta);
        d.m0 = j.value("m0", d.m0);
        d.r0 = j.value("r0", d.r0);
        if (!(d.beta > 1.0)) throw validation_error("decay exponent beta must exceed 1");
        if (!(d.m0 > 0.0) || !(d.r0 >= 1.0))
            throw validation_error("decay metadata needs m0 > 0 and r0 >= 1");
        p.decay = d;
    }
    return p;
}

struct RunConfig {
    std::string command;
    Potential potential;
    double energy = 1.0;
    std::vector<double> direction;
    std::vector<double> schedule;
    std::size_t grid = 1024;
    double window_tau = 2.0;
    double comparison_radius = 0.0;
    double eta = 0.1;
    double cone_epsilon = 0.1;
    MinimizeOptions minimize;
    std::filesystem::path out_dir;
    json raw;
};

inline RunConfig parse_config(const json& j) {
    RunConfig cfg;
    cfg.raw = j;
    if (!j.contains("command")) throw validation_error("config needs a command");
    cfg.command = j.at("command").get<std::string>();
    if (!j.contains("out_dir")) throw validation_error("config needs out_dir");
    cfg.out_dir = j.at("out_dir").get<std::string>();

    if (j.contains("potential")) cfg.potential = parse_potential(j.at("potential"));
    else if (cfg.command != "oracle" && cfg.command != "analyze")
        throw validation_error("config needs a potential block");

    cfg.energy = j.value("energy", 1.0);
    if (j.contains("direction")) {
        cfg.direction = j.at("direction").get<std::vector<double>>();
        if (int(cfg.direction.size()) != cfg.potential.dim)
            throw validation_error("direction length must match potential.dim");
    }
    if (j.contains("schedule")) {
        if (j.at("schedule").is_array())
            cfg.schedule = j.at("schedule").get<std::vector<double>>();
        else
            cfg.schedule = {j.at("schedule").get<double>()};
    }
    cfg.grid = j.value("grid", std::size_t(1024));
    cfg.window_tau = j.value("window_tau", 2.0);
    cfg.comparison_radius = j.value("comparison_L", 0.0);
    cfg.eta = j.value("eta", 0.1);
    cfg.cone_epsilon = j.value("cone_epsilon", 0.1);
    if (j.contains("minimizer")) {
        const auto& m = j.at("minimizer");
        cfg.minimize.max_iterations = m.value("max_iters", cfg.minimize.max_iterations);
        cfg.minimize.gradient_tol = m.value("tol", cfg.minimize.gradient_tol);
        cfg.minimize.guard_radius = m.value("guard", cfg.minimize.guard_radius);
        cfg.minimize.seed = m.value("seed", cfg.minimize.seed);
        cfg.minimize.initial_step = m.value("initial_step", cfg.minimize.initial_step);
        cfg.minimize.backtrack = m.value("backtrack", cfg.minimize.backtrack);
    }
    return cfg;
}

inline std::vector<double> effective_direction(const RunConfig& cfg) {
    if (!cfg.direction.empty()) return unit(cfg.direction);
    std::vector<double> e(cfg.potential.dim, 0.0);
    e[0] = 1.0;
    return e;
}

// --- subcommands -----------------------------------------------------------

inline int cmd_check_potential(const RunConfig& cfg) {
    const auto rep = check_hypotheses(cfg.potential);
    json out = {{"potential", cfg.raw.at("potential")}, {"report", to_json(rep)}};
    write_json(cfg.out_dir / "hypotheses.json", out);
    return rep.required_passed() ? 0 : 3;
}

inline int cmd_minimize(const RunConfig& cfg) {
    if (cfg.schedule.empty()) throw validation_error("minimize needs a schedule entry (R)");
    const double R = cfg.schedule.front();
    const auto rep = check_hypotheses(cfg.potential);
    if (!rep.required_passed()) {
        write_json(cfg.out_dir / "hypotheses.json", to_json(rep));
        return 3;
    }
    const auto thresholds = virial_threshold_radii(cfg.potential, cfg.energy);
    MinimizeOptions opt = cfg.minimize;
    if (!(opt.guard_radius > 0.0)) opt.guard_radius = 0.5 * thresholds.m_inner;

    const auto e = effective_direction(cfg);
    const auto e_perp = orthogonal_unit(e);
    const auto start = build_circular(R, e, e_perp, cfg.grid);
    const auto result = minimize_loop(cfg.potential, start, cfg.energy, opt);
    const auto orbit = maupertuis_rescale(cfg.potential, result.loop, cfg.energy);
    const auto res = residuals(cfg.potential, orbit);

    const std::string tag = format_radius(R);
    write_loop_csv(cfg.out_dir / ("loop_R" + tag + ".csv"), result.loop);
    write_orbit_csv(cfg.out_dir / ("orbit_R" + tag + ".csv"), orbit);
    json out = {{"R", R},
                {"f", result.stats.final_value},
                {"T", orbit.period},
                {"iterations", result.stats.iterations},
                {"grad_norm", result.stats.final_grad_norm},
                {"min_radius", result.stats.min_radius_seen},
                {"guard_radius", opt.guard_radius},
                {"thresholds",
                 {{"m_inner", thresholds.m_inner}, {"M_outer", thresholds.M_outer}}},
                {"residuals", to_json(res)}};
    write_json(cfg.out_dir / "minimize.json", out);
    return 0;
}

inline int cmd_continue(const RunConfig& cfg) {
    ContinuationConfig cc;
    cc.potential = cfg.potential;
    cc.energy = cfg.energy;
    cc.direction = effective_direction(cfg);
    if (!cfg.schedule.empty()) cc.schedule = cfg.schedule;
    cc.grid = cfg.grid;
    cc.comparison_radius = cfg.comparison_radius;
    cc.window_tau = cfg.window_tau;
    cc.eta = cfg.eta;
    cc.cone_epsilon = cfg.cone_epsilon;
    cc.minimize = cfg.minimize;

    const auto result = run_continuation(cc);

    json records = json::array();
    for (const auto& rec : result.records) records.push_back(to_json(rec));
    json out = {{"config", cfg.raw},
                {"thresholds",
                 {{"m_inner", result.thresholds.m_inner},
                  {"M_outer", result.thresholds.M_outer}}},
                {"comparison_L", result.comparison_radius},
                {"guard_radius", result.guard_radius},
                {"M6", result.m6},
                {"records", records}};
    write_json(cfg.out_dir / "diagnostics.json", out);

    for (std::size_t i = 0; i < result.orbits.size(); ++i) {
        const std::string tag = format_radius(result.records[i].boundary_radius);
        write_orbit_csv(cfg.out_dir / ("orbit_R" + tag + ".csv"), result.orbits[i]);
        write_angular_csv(cfg.out_dir / ("angular_R" + tag + ".csv"),
                          angular_diagnostics(result.orbits[i]));
    }
    write_orbit_csv(cfg.out_dir / "u_infinity.csv", result.limit_proxy());
    return 0;
}

inline PeriodicOrbit orbit_from_table(const CsvTable& table, double energy,
                                      double boundary_radius) {
    if (table.rows.size() < 3) throw validation_error("orbit CSV too short");
    const int dim = int((table.header.size() - 1) / 2);
    const std::size_t n = table.rows.size() - 1;  // last row is the wrap sample
    PeriodicOrbit orbit;
    orbit.dim = dim;
    orbit.energy = energy;
    orbit.boundary_radius = boundary_radius;
    orbit.t_start = table.rows.front().front();
    orbit.dt = table.rows[1][0] - table.rows[0][0];
    orbit.period = table.rows.back().front() - orbit.t_start;
    orbit.positions.resize(n * dim);
    orbit.velocities.resize(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < dim; ++c) {
            orbit.positions[i * dim + c] = table.rows[i][1 + c];
            orbit.velocities[i * dim + c] = table.rows[i][1 + dim + c];
        }
    }
    return orbit;
}

/// Post-run analysis: angular/escape/drift reports for the final orbit plus
/// plain-CSV plot bundles for every schedule entry.
inline int cmd_analyze(const RunConfig& cfg) {
    const auto diagnostics = read_json(cfg.out_dir / "diagnostics.json");
    const auto run_cfg = parse_config(diagnostics.at("config"));
    const double energy = run_cfg.energy;
    const auto e = effective_direction(run_cfg);

    const auto& records = diagnostics.at("records");
    if (records.empty()) throw not_found_error("run has no records");

    std::vector<std::vector<double>> f_rows, escape_rows;
    PeriodicOrbit last_orbit;
    json last_record;
    for (const auto& rec : records) {
        const double R = rec.at("R").get<double>();
        const std::string tag = format_radius(R);
        const auto table = read_csv(cfg.out_dir / ("orbit_R" + tag + ".csv"));
        const auto orbit = orbit_from_table(table, energy, R);
        const auto diag = angular_diagnostics(orbit);

        std::vector<std::vector<double>> radius_rows, speed_rows, omega_rows;
        for (std::size_t i = 0; i < orbit.count(); ++i) {
            radius_rows.push_back({orbit.time_at(i), orbit.radius(i)});
            speed_rows.push_back({orbit.time_at(i), orbit.speed(i)});
            omega_rows.push_back({diag.times[i], diag.omega[i]});
        }
        write_series_csv(cfg.out_dir / ("radius_time_R" + tag + ".csv"), "t,r", radius_rows);
        write_series_csv(cfg.out_dir / ("speed_time_R" + tag + ".csv"), "t,speed", speed_rows);
        write_series_csv(cfg.out_dir / ("omega_time_R" + tag + ".csv"), "t,omega", omega_rows);

        f_rows.push_back({R, rec.at("f").get<double>()});
        const double t_plus = rec.at("t_plus").get<double>();
        escape_rows.push_back(
            {R, rec.at("t_minus").get<double>(), t_plus,
             0.5 * rec.at("T").get<double>() - t_plus});
        last_orbit = orbit;
        last_record = rec;
    }
    write_series_csv(cfg.out_dir / "f_vs_R.csv", "R,f", f_rows);
    write_series_csv(cfg.out_dir / "escape_time_vs_R.csv",
                     "R,t_minus,t_plus,escape_margin", escape_rows);

    // Tail analysis of the final orbit.
    json analysis = {{"R", last_record.at("R")}};
    const auto diag = angular_diagnostics(last_orbit);
    const double t_plus = last_record.at("t_plus").get<double>();
    const double t_minus = last_record.at("t_minus").get<double>();

    double t0 = 0.0;
    bool have_t0 = false;
    for (std::size_t i = 0; i < last_orbit.count(); ++i) {
        const double t = last_orbit.time_at(i);
        if (t <= t_plus) continue;
        if (diag.radial_sign[i] > 0 && diag.omega[i] < run_cfg.eta) {
            t0 = t;
            have_t0 = true;
            break;
        }
    }
    if (have_t0) {
        const auto escape =
            monotone_escape_check(diag, last_orbit, t0, run_cfg.eta);
        analysis["monotone_escape"] = {{"t0", t0},
                                       {"passed", escape.passed()},
                                       {"worst_omega", escape.worst_omega},
                                       {"worst_rate_gap", escape.worst_rate_gap},
                                       {"worst_growth_gap", escape.worst_growth_gap}};
        if (run_cfg.potential.decay) {
            const double t1 = last_orbit.time_at(last_orbit.count() - 1);
            const auto drift = direction_drift_check(diag, last_orbit, run_cfg.potential,
                                                     t0, t1, run_cfg.eta);
            analysis["direction_drift"] = {{"t0", t0},
                                           {"t1", t1},
                                           {"drift", drift.drift},
                                           {"bound", drift.bound},
                                           {"pass", drift.pass}};
            const auto dir = asymptotic_direction(last_orbit, run_cfg.potential, diag, e,
                                                  t_minus, t_plus, run_cfg.eta,
                                                  run_cfg.cone_epsilon);
            analysis["asymptotic_direction"] = {{"error_to_e", dir.error_to_e},
                                                {"conclusive", dir.conclusive},
                                                {"confined", dir.confined},
                                                {"M11", dir.confinement_radius},
                                                {"worst_gap", dir.worst_gap},
                                                {"checked_samples", dir.checked_samples}};
        }
    } else {
        analysis["monotone_escape"] = {{"passed", false},
                                       {"note", "no trigger time found past t_plus"}};
    }
    write_json(cfg.out_dir / "analysis.json", analysis);
    return 0;
}

/// Closed-form Kepler checks backing the integrator and the classifier.
inline int cmd_oracle(const RunConfig& cfg) {
    const auto kepler = make_kepler_test(2);
    json out;
    bool ok = true;

    // Hyperbola from perihelion: H = 1, angular momentum 2, eccentricity 3.
    {
        const std::vector<double> u0{1.0, 0.0}, v0{0.0, 2.0};
        const auto traj = integrate_ode(kepler, u0, v0, 0.0, 10.0, 1e-3);
        const double ecc = conic_eccentricity(traj);
        double drift = 0.0;
        for (std::size_t i = 0; i < traj.count(); ++i) {
            const double energy = 0.5 * norm_sq(traj.velocity(i)) +
                                  potential_value(kepler, traj.position(i));
            drift = std::max(drift, std::abs(energy - 1.0));
        }
        const bool ecc_ok = std::abs(ecc - 3.0) <= 1e-6;
        const bool drift_ok = drift < 1e-9;
        ok = ok && ecc_ok && drift_ok;
        out["hyperbola"] = {{"eccentricity", ecc},
                            {"eccentricity_ok", ecc_ok},
                            {"energy_drift", drift},
                            {"drift_ok", drift_ok}};

        const auto far = integrate_ode(kepler, u0, v0, 0.0, 90.0, 1e-3);
        const auto cls = classify_orbit(far, 100.0, 0.05 * std::sqrt(2.0));
        ok = ok && cls == OrbitClass::hyperbolic;
        out["classify_hyperbolic"] = orbit_class_name(cls);
    }

    // Parabolic escape: H = 0; drive far enough out that the speed sinks
    // below the absolute tolerance 1e-2 (i.e. |u| past 2e4).
    {
        const std::vector<double> u0{1.0, 0.0}, v0{0.0, std::sqrt(2.0)};
        auto accel = [&kepler](const std::vector<double>& x, std::vector<double>& a) {
            const auto s = evaluate(kepler, x);
            for (std::size_t c = 0; c < a.size(); ++c) a[c] = -s.gradient[c];
        };
        auto traj = integrate_ode_with(accel, u0, v0, 0.0, 1.6e6, 0.05, 1e-6, 1000);
        const auto cls = classify_orbit(traj, 2.0e4, 1e-2);
        ok = ok && cls == OrbitClass::parabolic;
        out["classify_parabolic"] = orbit_class_name(cls);
        out["parabolic_terminal_speed"] = norm(traj.velocity(traj.count() - 1));
    }

    // Circular ellipse: H = -1/2, period 2 pi.
    {
        const std::vector<double> u0{1.0, 0.0}, v0{0.0, 1.0};
        const auto traj = integrate_ode(kepler, u0, v0, 0.0, 4.0 * M_PI, 1e-3);
        const auto cls = classify_orbit(traj, 100.0, 1e-2);
        ok = ok && cls == OrbitClass::elliptic;
        out["classify_elliptic"] = orbit_class_name(cls);

        // Return to the start after one period.
        double best = 1e30;
        for (std::size_t i = 0; i < traj.count(); ++i) {
            if (std::abs(traj.times[i] - 2.0 * M_PI) > 2e-3) continue;
            best = std::min(best, distance(traj.position(i), u0));
        }
        ok = ok && best < 1e-6;
        out["circular_return_gap"] = best;
    }

    out["pass"] = ok;
    write_json(cfg.out_dir / "oracle.json", out);
    return ok ? 0 : 2;
}

inline int dispatch(const RunConfig& cfg) {
    if (cfg.command == "check-potential") return cmd_check_potential(cfg);
    if (cfg.command == "minimize") return cmd_minimize(cfg);
    if (cfg.command == "continue") return cmd_continue(cfg);
    if (cfg.command == "analyze") return cmd_analyze(cfg);
    if (cfg.command == "oracle") return cmd_oracle(cfg);
    throw validation_error("unknown command: " + cfg.command);
}

inline int exit_code_for(const std::exception& ex) {
    if (dynamic_cast<const hypothesis_error*>(&ex)) return 3;
    if (dynamic_cast<const validation_error*>(&ex)) return 1;
    if (dynamic_cast<const invalid_frame_error*>(&ex)) return 1;
    if (dynamic_cast<const invalid_window_error*>(&ex)) return 1;
    if (dynamic_cast<const not_found_error*>(&ex)) return 1;
    if (dynamic_cast<const nlohmann::json::exception*>(&ex)) return 1;
    return 2;
}

inline const char* exit_kind(int code) {
    switch (code) {
        case 1: return "config";
        case 2: return "numerical";
        case 3: return "hypothesis";
    }
    return "ok";
}

/// Execute a parsed config; errors become error.json plus the exit code.
inline int run_json(const json& config, std::ostream& log = std::cerr) {
    std::filesystem::path out_dir;
    try {
        const auto cfg = parse_config(config);
        out_dir = cfg.out_dir;
        std::filesystem::create_directories(out_dir);
        const int code = dispatch(cfg);
        if (code != 0) {
            write_json(out_dir / "error.json",
                       {{"code", code},
                        {"kind", exit_kind(code)},
                        {"message", "command reported failure"}});
        }
        return code;
    } catch (const std::exception& ex) {
        const int code = exit_code_for(ex);
        log << "error: " << ex.what() << "\n";
        if (!out_dir.empty()) {
            std::error_code fs_ec;
            std::filesystem::create_directories(out_dir, fs_ec);
            if (!fs_ec) {
                try {
                    write_json(out_dir / "error.json", {{"code", code},
                                                        {"kind", exit_kind(code)},
                                                        {"message", ex.what()}});
                } catch (...) {
                }
            }
        }
        return code;
    }
}

inline int run(const std::filesystem::path& config_path, std::ostream& log = std::cerr) {
    std::ifstream in(config_path);
    if (!in) {
        log << "error: cannot read config " << config_path << "\n";
        return 1;
    }
    json config;
    try {
        in >> config;
    } catch (const std::exception& ex) {
        log << "error: config parse failure: " << ex.what() << "\n";
        return 1;
    }
    return run_json(config, log);
}

}  // namespace cli

}  // namespace hyporb
