#pragma once

// Artifact serialization: CSV trajectories/series with exact headers and JSON
// diagnostics. Floating-point values are written with 17 significant digits so
// files round-trip bit-exactly; nothing time- or locale-dependent is emitted.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyporb/continuation.hpp"
#include "hyporb/errors.hpp"
#include "hyporb/loop.hpp"
#include "hyporb/orbit.hpp"
#include "hyporb/potential.hpp"

namespace hyporb {

using json = nlohmann::ordered_json;

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot open for writing: " + path.string());
    return out;
}

inline std::string axis_header(const char* prefix, int dim) {
    std::string s;
    for (int c = 0; c < dim; ++c) {
        s += ',';
        s += prefix;
        s += std::to_string(c + 1);
    }
    return s;
}

}  // namespace detail

/// Header `t,x1..xN,v1..vN`; one row per grid step plus the closing wrap
/// sample, so the file covers [-T/2, T/2] inclusive.
inline void write_orbit_csv(const std::filesystem::path& path, const PeriodicOrbit& orbit) {
    auto out = detail::open_out(path);
    out << "t" << detail::axis_header("x", orbit.dim) << detail::axis_header("v", orbit.dim)
        << "\n";
    const std::size_t n = orbit.count();
    for (std::size_t i = 0; i <= n; ++i) {
        const std::size_t k = i % n;
        const double t = (i == n) ? orbit.time_at(0) + orbit.period : orbit.time_at(i);
        out << format_double(t);
        for (int c = 0; c < orbit.dim; ++c)
            out << ',' << format_double(orbit.positions[k * orbit.dim + c]);
        for (int c = 0; c < orbit.dim; ++c)
            out << ',' << format_double(orbit.velocities[k * orbit.dim + c]);
        out << "\n";
    }
}

/// Header `t,x1..xN` over the full period [0, 1].
inline void write_loop_csv(const std::filesystem::path& path, const SymmetricLoop& loop) {
    auto out = detail::open_out(path);
    out << "t" << detail::axis_header("x", loop.dim) << "\n";
    const std::size_t n = loop.full_count();
    std::vector<double> x(loop.dim);
    for (std::size_t k = 0; k <= n; ++k) {
        loop.full_node(k % n, x);
        out << format_double(double(k) / double(n));
        for (int c = 0; c < loop.dim; ++c) out << ',' << format_double(x[c]);
        out << "\n";
    }
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    auto out = detail::open_out(path);
    out << "t" << detail::axis_header("x", traj.dim) << detail::axis_header("v", traj.dim)
        << "\n";
    for (std::size_t i = 0; i < traj.count(); ++i) {
        out << format_double(traj.times[i]);
        for (int c = 0; c < traj.dim; ++c)
            out << ',' << format_double(traj.positions[i * traj.dim + c]);
        for (int c = 0; c < traj.dim; ++c)
            out << ',' << format_double(traj.velocities[i * traj.dim + c]);
        out << "\n";
    }
}

/// Header `t,A,omega,dirx1..dirxN`.
inline void write_angular_csv(const std::filesystem::path& path,
                              const AngularDiagnostics& diag) {
    auto out = detail::open_out(path);
    out << "t,A,omega" << detail::axis_header("dirx", diag.dim) << "\n";
    for (std::size_t i = 0; i < diag.times.size(); ++i) {
        out << format_double(diag.times[i]) << ',' << format_double(diag.area_rate[i]) << ','
            << format_double(diag.omega[i]);
        for (int c = 0; c < diag.dim; ++c)
            out << ',' << format_double(diag.directions[i * diag.dim + c]);
        out << "\n";
    }
}

/// Generic numeric table with a comma-joined header.
inline void write_series_csv(const std::filesystem::path& path, const std::string& header,
                             const std::vector<std::vector<double>>& rows) {
    auto out = detail::open_out(path);
    out << header << "\n";
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) out << ',';
            out << format_double(r[c]);
        }
        out << "\n";
    }
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw not_found_error("missing artifact: " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw validation_error("empty CSV: " + path.string());
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != table.header.size())
            throw validation_error("ragged CSV row in " + path.string());
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ---------------------------------------------------------------------------
// JSON views
// ---------------------------------------------------------------------------

inline json to_json(const HypothesisReport& rep) {
    json checks = json::array();
    for (const auto& c : rep.checks) {
        checks.push_back({{"id", c.id},
                          {"applicable", c.applicable},
                          {"passed", c.passed},
                          {"witness_value", c.witness_value},
                          {"witness_radius", c.witness_radius},
                          {"note", c.note}});
    }
    return {{"checks", checks}, {"required_passed", rep.required_passed()}};
}

inline json to_json(const DiagnosticsRecord& r) {
    json j = {{"R", r.boundary_radius},
              {"f", r.action},
              {"T", r.period},
              {"min_radius", r.min_radius},
              {"max_radius", r.max_radius},
              {"t_minus", r.t_minus},
              {"t_plus", r.t_plus},
              {"t_star", r.t_star},
              {"energy_residual", r.energy_residual},
              {"ode_residual", r.ode_residual},
              {"virial_residual", r.virial_residual},
              {"virial_identity_residual", r.virial_identity_residual},
              {"corner_impulse", r.corner_impulse},
              {"lipschitz", r.lipschitz},
              {"M5", r.speed_bound},
              {"M3", r.potential_sup},
              {"sqrt_two_f", r.sqrt_two_action},
              {"comparison_action", r.comparison_action},
              {"profile_tau", r.profile_tau},
              {"direction_error", r.direction_error},
              {"escape_lhs", r.escape_lhs},
              {"escape_rhs", r.escape_rhs},
              {"minimize_iterations", r.minimize_iterations},
              {"final_grad_norm", r.final_grad_norm},
              {"warnings", r.warnings}};
    if (r.cloc_delta == r.cloc_delta)
        j["cloc_delta"] = r.cloc_delta;
    else
        j["cloc_delta"] = nullptr;
    return j;
}

inline json to_json(const ResidualReport& r) {
    return {{"energy_residual", r.energy_residual},
            {"ode_residual", r.ode_residual},
            {"virial_residual", r.virial_residual},
            {"virial_identity_residual", r.virial_identity_residual},
            {"corner_impulse", r.corner_impulse},
            {"lipschitz", r.lipschitz},
            {"M5", r.speed_bound}};
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    auto out = detail::open_out(path);
    out << j.dump(2) << "\n";
}

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw not_found_error("missing artifact: " + path.string());
    json j;
    in >> j;
    return j;
}

}  // namespace hyporb
