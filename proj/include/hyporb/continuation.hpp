#pragma once

// Continuation in the pin radius R: minimize at each scheduled R with warm
// starts, rescale to a periodic orbit, measure escape times past |u| = L,
// recenter at the first crossing of the outer virial radius, and track
// convergence of the recentered orbits on a fixed window. The final recentered
// orbit is the proxy for the unbounded limit orbit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "hyporb/action.hpp"
#include "hyporb/asymptotics.hpp"
#include "hyporb/errors.hpp"
#include "hyporb/loop.hpp"
#include "hyporb/minimize.hpp"
#include "hyporb/orbit.hpp"
#include "hyporb/potential.hpp"
#include "hyporb/vec.hpp"

namespace hyporb {

struct EscapeTimes {
    double t_minus = 0.0;
    double t_plus = 0.0;
};

/// First and last interpolated times with |u| <= L inside [-T/2, T/2].
inline EscapeTimes escape_times(const PeriodicOrbit& orbit, double level) {
    if (level >= orbit.boundary_radius)
        throw validation_error("escape level L must be below the boundary radius");
    const std::size_t n = orbit.count();

    // Radii at grid samples plus the closing wrap sample.
    std::vector<double> r(n + 1), t(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = orbit.radius(i);
        t[i] = orbit.time_at(i);
    }
    r[n] = r[0];
    t[n] = orbit.time_at(0) + orbit.period;

    bool any = false;
    for (std::size_t i = 0; i <= n && !any; ++i) any = r[i] <= level;
    if (!any) throw no_passage_error("orbit never enters |u| <= L");

    auto cross_down = [&](std::size_t i) {  // r[i] > level >= r[i+1]
        return t[i] + (t[i + 1] - t[i]) * (r[i] - level) / (r[i] - r[i + 1]);
    };
    auto cross_up = [&](std::size_t i) {  // r[i] <= level < r[i+1]
        return t[i] + (t[i + 1] - t[i]) * (level - r[i]) / (r[i + 1] - r[i]);
    };

    EscapeTimes out;
    // t_minus: first time the radius reaches the level.
    out.t_minus = t[0];
    for (std::size_t i = 0; i <= n; ++i) {
        if (r[i] <= level) {
            out.t_minus = (i == 0) ? t[0] : cross_down(i - 1);
            break;
        }
    }
    // t_plus: last time with radius <= level.
    out.t_plus = t[n];
    for (std::size_t i = n + 1; i-- > 0;) {
        if (r[i] <= level) {
            out.t_plus = (i == n) ? t[n] : cross_up(i);
            break;
        }
    }
    return out;
}

struct Recentered {
    PeriodicOrbit orbit;
    double t_star = 0.0;
};

/// t* = earliest interpolated time with |u| = level; the returned orbit is the
/// time translation by t*, so its radius at t = 0 is the level (to
/// interpolation accuracy).
inline Recentered recenter(const PeriodicOrbit& orbit, double level) {
    const std::size_t n = orbit.count();
    double found = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < n; ++i) {
        const double r0 = orbit.radius(i);
        const double r1 = orbit.radius((i + 1) % n);
        const double t0 = orbit.time_at(i);
        const double t1 = t0 + orbit.dt;
        if (r0 == level) {
            found = t0;
            break;
        }
        if ((r0 - level) * (r1 - level) < 0.0) {
            found = t0 + (t1 - t0) * (r0 - level) / (r0 - r1);
            break;
        }
    }
    if (!(found == found))
        throw recenter_error("orbit never crosses the recentering radius");
    Recentered out{time_translate(orbit, found), found};
    return out;
}

/// sup over t in [-tau, tau] of |a(t) - b(t)| on a common interpolated grid.
inline double cloc_delta(const PeriodicOrbit& a, const PeriodicOrbit& b, double tau,
                         std::size_t samples = 2049) {
    if (!(tau > 0.0)) throw validation_error("window half-width must be positive");
    if (tau > 0.5 * a.period || tau > 0.5 * b.period)
        throw invalid_window_error("window exceeds an orbit's half period");
    if (a.dim != b.dim) throw validation_error("orbit dimensions differ");
    std::vector<double> xa(a.dim), xb(b.dim);
    double worst = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = -tau + 2.0 * tau * double(i) / double(samples - 1);
        a.position_at(t, xa);
        b.position_at(t, xb);
        worst = std::max(worst, distance(xa, xb));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// The continuation driver
// ---------------------------------------------------------------------------

struct ContinuationConfig {
    Potential potential;
    double energy = 1.0;
    std::vector<double> direction;        // e; defaults to the first axis
    std::vector<double> schedule{4.0, 8.0, 16.0, 32.0, 64.0};
    std::size_t grid = 1024;              // half-grid size M at every R
    double comparison_radius = 0.0;       // L; 0 => 2 * M_outer
    double window_tau = 2.0;
    double eta = 0.1;                     // transverse-fraction threshold
    double cone_epsilon = 0.1;
    MinimizeOptions minimize;             // guard_radius 0 => 0.5 * m_inner
    HypothesisOptions hypothesis;
};

struct DiagnosticsRecord {
    double boundary_radius = 0.0;  // R
    double action = 0.0;           // f(q_R)
    double period = 0.0;           // T_R
    double min_radius = 0.0;
    double max_radius = 0.0;
    double t_minus = 0.0;
    double t_plus = 0.0;
    double t_star = 0.0;
    double energy_residual = 0.0;
    double ode_residual = 0.0;
    double virial_residual = 0.0;
    double virial_identity_residual = 0.0;
    double corner_impulse = 0.0;
    double lipschitz = 0.0;
    double speed_bound = 0.0;      // M5
    double potential_sup = 0.0;    // M3 = sup |V| along the orbit
    double cloc_delta = std::numeric_limits<double>::quiet_NaN();
    double sqrt_two_action = 0.0;  // sqrt(2 f(q_R))
    double comparison_action = 0.0;
    double profile_tau = 0.0;
    double direction_error = 0.0;
    double escape_lhs = 0.0;       // sqrt(H) (R - L)
    double escape_rhs = 0.0;       // sqrt(2) (H + M3) (T/2 - t_plus)
    std::size_t minimize_iterations = 0;
    double final_grad_norm = 0.0;
    std::vector<std::string> warnings;
};

struct ContinuationResult {
    RadiusBounds thresholds;
    double comparison_radius = 0.0;  // L actually used
    double recenter_level = 0.0;     // radius whose first crossing defines t*
    double guard_radius = 0.0;
    double m6 = 0.0;                 // run-level max of (comparison - 2 sqrt(H) R)
    std::vector<DiagnosticsRecord> records;
    std::vector<SymmetricLoop> minimizers;
    std::vector<PeriodicOrbit> orbits;      // natural frame
    std::vector<PeriodicOrbit> recentered;  // shifted by t*

    const PeriodicOrbit& limit_proxy() const { return recentered.back(); }
};

inline ContinuationResult run_continuation(const ContinuationConfig& cfg) {
    const Potential& p = cfg.potential;
    if (!(cfg.energy > 0.0)) throw validation_error("energy must be positive");
    if (cfg.schedule.empty()) throw validation_error("schedule is empty");
    for (std::size_t i = 0; i + 1 < cfg.schedule.size(); ++i)
        if (!(cfg.schedule[i] < cfg.schedule[i + 1]))
            throw validation_error("schedule must be strictly increasing");
    if (cfg.grid < 8) throw validation_error("grid must be at least 8");
    if (!(cfg.window_tau > 0.0)) throw validation_error("window half-width must be positive");
    if (!(cfg.eta > 0.0 && cfg.eta < 0.5)) throw validation_error("eta must lie in (0, 1/2)");

    std::vector<double> e = cfg.direction.empty()
                                ? std::vector<double>{}
                                : unit(cfg.direction);
    if (e.empty()) {
        e.assign(p.dim, 0.0);
        e[0] = 1.0;
    }
    if (int(e.size()) != p.dim)
        throw validation_error("direction dimension differs from the potential");

    const auto hyp = check_hypotheses(p, cfg.hypothesis);
    if (!hyp.required_passed())
        throw hypothesis_error(std::string("potential fails required hypotheses (") +
                               family_name(p.family) + ")");

    ContinuationResult result;
    result.thresholds = virial_threshold_radii(p, cfg.energy);

    MinimizeOptions mopt = cfg.minimize;
    if (!(mopt.guard_radius > 0.0)) mopt.guard_radius = 0.5 * result.thresholds.m_inner;
    result.guard_radius = mopt.guard_radius;

    const auto e_perp = orthogonal_unit(e);

    // Pass 1: minimize along the schedule with warm starts; collect orbits.
    double max_min_radius = 0.0;
    std::vector<MinimizeStats> stats;
    for (std::size_t idx = 0; idx < cfg.schedule.size(); ++idx) {
        const double R = cfg.schedule[idx];
        SymmetricLoop start =
            idx == 0 ? build_circular(R, e, e_perp, cfg.grid)
                     : resample(result.minimizers.back(), cfg.grid, R);
        auto minimized = minimize_loop(p, start, cfg.energy, mopt);
        auto orbit = maupertuis_rescale(p, minimized.loop, cfg.energy);
        double min_r = orbit.radius(0);
        for (std::size_t i = 0; i < orbit.count(); ++i)
            min_r = std::min(min_r, orbit.radius(i));
        max_min_radius = std::max(max_min_radius, min_r);
        stats.push_back(minimized.stats);
        result.minimizers.push_back(std::move(minimized.loop));
        result.orbits.push_back(std::move(orbit));
    }

    // The pins exert radial impulses on the minimizer, so its closest approach
    // creeps above the outer virial radius as R grows. The comparison radius L
    // and the recentering level must sit above every closest approach or the
    // passage/crossing scans come up empty; when the defaults would not, they
    // are lifted and the records carry a warning.
    bool levels_lifted = false;
    result.comparison_radius = cfg.comparison_radius > 0.0
                                   ? cfg.comparison_radius
                                   : 2.0 * result.thresholds.M_outer;
    if (cfg.comparison_radius <= 0.0 &&
        result.comparison_radius <= 1.2 * max_min_radius) {
        result.comparison_radius = 1.2 * max_min_radius;
        levels_lifted = true;
    }
    if (result.comparison_radius <= result.thresholds.M_outer)
        throw validation_error("comparison radius L must exceed the outer virial radius");
    if (result.comparison_radius >= cfg.schedule.front())
        throw validation_error("comparison radius L must be below the smallest schedule R");

    result.recenter_level = result.thresholds.M_outer;
    if (result.recenter_level < max_min_radius * (1.0 + 1e-9)) {
        result.recenter_level =
            std::min(1.05 * max_min_radius, 0.5 * (max_min_radius + result.comparison_radius));
        levels_lifted = true;
    }
    if (result.recenter_level >= result.comparison_radius)
        throw validation_error("recentering level must stay below the comparison radius L");

    // Pass 2: diagnostics per schedule entry.
    for (std::size_t idx = 0; idx < cfg.schedule.size(); ++idx) {
        const double R = cfg.schedule[idx];
        const auto& orbit = result.orbits[idx];
        const auto res = residuals(p, orbit);
        const auto et = escape_times(orbit, result.comparison_radius);

        DiagnosticsRecord rec;
        rec.boundary_radius = R;
        rec.action = stats[idx].final_value;
        rec.period = orbit.period;
        rec.minimize_iterations = stats[idx].iterations;
        rec.final_grad_norm = stats[idx].final_grad_norm;

        double min_r = orbit.radius(0), max_r = min_r, max_abs_v = 0.0;
        for (std::size_t i = 0; i < orbit.count(); ++i) {
            const double r = orbit.radius(i);
            min_r = std::min(min_r, r);
            max_r = std::max(max_r, r);
            max_abs_v = std::max(max_abs_v, std::abs(potential_value(p, orbit.position(i))));
        }
        rec.min_radius = min_r;
        rec.max_radius = max_r;
        rec.potential_sup = max_abs_v;
        rec.energy_residual = res.energy_residual;
        rec.ode_residual = res.ode_residual;
        rec.virial_residual = res.virial_residual;
        rec.virial_identity_residual = res.virial_identity_residual;
        rec.corner_impulse = res.corner_impulse;
        rec.lipschitz = res.lipschitz;
        rec.speed_bound = res.speed_bound;
        rec.t_minus = et.t_minus;
        rec.t_plus = et.t_plus;
        rec.escape_lhs = std::sqrt(cfg.energy) * (R - result.comparison_radius);
        rec.escape_rhs = std::sqrt(2.0) * (cfg.energy + rec.potential_sup) *
                         (0.5 * orbit.period - et.t_plus);

        auto rc = recenter(orbit, result.recenter_level);
        rec.t_star = rc.t_star;

        const auto diag = angular_diagnostics(orbit);
        const auto profile = escape_profile(p, cfg.energy, R, e);
        rec.sqrt_two_action = std::sqrt(2.0 * rec.action);
        rec.comparison_action = profile.comparison_action;
        rec.profile_tau = profile.tau_r;

        if (p.decay) {
            const auto dir = asymptotic_direction(orbit, p, diag, e, et.t_minus, et.t_plus,
                                                  cfg.eta, cfg.cone_epsilon);
            rec.direction_error = dir.error_to_e;
            if (dir.conclusive && !dir.confined)
                rec.warnings.push_back("direction cone violated on an escape tail");
        }

        if (!result.recentered.empty())
            rec.cloc_delta = cloc_delta(rc.orbit, result.recentered.back(), cfg.window_tau);
        if (result.records.size() >= 2) {
            const double prev = result.records.back().cloc_delta;
            if (prev == prev && rec.cloc_delta > prev)
                rec.warnings.push_back("C_loc delta increased (subsequence caveat)");
        }

        if (levels_lifted)
            rec.warnings.push_back("comparison/recentering levels lifted above the "
                                   "closest approach (pin impulses keep orbits outside "
                                   "the outer virial radius)");
        if (stats[idx].guard_proximity_warning)
            rec.warnings.push_back("minimizer radius within 10% of the guard");
        if (stats[idx].perturbed_start)
            rec.warnings.push_back("critical circular start perturbed");
        if (orbit.dt > 0.05) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "physical grid spacing %.3g exceeds 0.05", orbit.dt);
            rec.warnings.push_back(buf);
        }

        result.records.push_back(std::move(rec));
        result.recentered.push_back(std::move(rc.orbit));
    }

    double m6 = -std::numeric_limits<double>::infinity();
    for (const auto& rec : result.records)
        m6 = std::max(m6, rec.comparison_action -
                              2.0 * std::sqrt(cfg.energy) * rec.boundary_radius);
    result.m6 = m6;
    return result;
}

}  // namespace hyporb
