#pragma once

// Angular diagnostics of computed orbits: the area rate
//   A(t) = sqrt(|u|^2 |u'|^2 - (u, u')^2),
// the transverse fraction omega = A / (|u| |u'|) in [0, 1], the monotone-escape
// conditions, the direction-drift bound built from the (V7) decay metadata,
// the asymptotic-direction cone check on the escape tails, and the radial
// escape profile giving the action upper bound.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "hyporb/errors.hpp"
#include "hyporb/orbit.hpp"
#include "hyporb/potential.hpp"
#include "hyporb/vec.hpp"

namespace hyporb {

struct AngularDiagnostics {
    int dim = 2;
    std::vector<double> times;
    std::vector<double> area_rate;   // A(t)
    std::vector<double> omega;       // A / (|u| |u'|), clamped to [0, 1]
    std::vector<double> directions;  // u/|u|, count x dim
    std::vector<int> radial_sign;    // sign of (u, u')

    double area_rate_at(double t, double period) const { return sample(area_rate, t, period); }
    double omega_at(double t, double period) const { return sample(omega, t, period); }

private:
    double sample(const std::vector<double>& data, double t, double period) const {
        const std::size_t n = data.size();
        const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
        double s = (t - times.front()) / dt;
        double wrapped = std::fmod(s, double(n));
        if (wrapped < 0.0) wrapped += double(n);
        std::size_t i = std::size_t(wrapped);
        if (i >= n) i = 0;
        const double frac = wrapped - double(i);
        (void)period;
        return (1.0 - frac) * data[i] + frac * data[(i + 1) % n];
    }
};

inline AngularDiagnostics angular_diagnostics(const PeriodicOrbit& orbit) {
    const std::size_t n = orbit.count();
    const int dim = orbit.dim;

    AngularDiagnostics out;
    out.dim = dim;
    out.times.resize(n);
    out.area_rate.resize(n);
    out.omega.resize(n);
    out.directions.resize(n * dim);
    out.radial_sign.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto u = orbit.position(i);
        const auto v = orbit.velocity(i);
        const double r2 = norm_sq(u);
        const double v2 = norm_sq(v);
        const double uv = dot(u, v);
        double radicand = r2 * v2 - uv * uv;
        if (radicand < 0.0) radicand = 0.0;  // Cauchy-Schwarz holds up to rounding
        const double area = std::sqrt(radicand);
        const double rv = std::sqrt(r2 * v2);

        out.times[i] = orbit.time_at(i);
        out.area_rate[i] = area;
        out.omega[i] = rv > 0.0 ? std::min(area / rv, 1.0) : 0.0;
        out.radial_sign[i] = (uv > 0.0) - (uv < 0.0);
        const double r = std::sqrt(r2);
        auto d = row(out.directions, i, dim);
        for (int c = 0; c < dim; ++c) d[c] = r > 0.0 ? u[c] / r : 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monotone escape (trigger: |u(t0)| large, (u, u') > 0, omega(t0) < eta)
// ---------------------------------------------------------------------------

struct MonotoneEscapeReport {
    bool trigger_met = false;
    bool omega_below_eta = false;       // (i)
    bool radial_rate_vs_speed = false;  // (ii)  d|u|/dt >= sqrt(1-eta^2) |u'| - tol
    bool radial_rate_floor = false;     // (iii) d|u|/dt >= sqrt(2(1-eta^2)H) - tol
    bool linear_growth = false;         // (iv)  |u(t)| >= |u(t0)| + sqrt(2(1-eta^2)H)(t-t0)
    double worst_omega = 0.0;
    double worst_rate_gap = 0.0;        // most negative margin of (ii)/(iii)
    double worst_growth_gap = 0.0;
    std::string note;

    bool passed() const {
        return trigger_met && omega_below_eta && radial_rate_vs_speed &&
               radial_rate_floor && linear_growth;
    }
};

/// Checks (i)-(iv) on the grid times in [t0, T/2] of a natural-frame orbit.
inline MonotoneEscapeReport monotone_escape_check(const AngularDiagnostics& diag,
                                                  const PeriodicOrbit& orbit, double t0,
                                                  double eta, double tol = 1e-3) {
    if (!(eta > 0.0 && eta < 1.0)) throw validation_error("eta must lie in (0,1)");
    MonotoneEscapeReport rep;

    std::vector<double> u(orbit.dim), v(orbit.dim);
    orbit.position_at(t0, u);
    orbit.velocity_at(t0, v);
    const double omega0 = diag.omega_at(t0, orbit.period);
    if (dot(u, v) <= 0.0 || omega0 >= eta) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "trigger unmet at t0: (u,u') = %.3g, omega = %.3g (eta = %.3g)",
                      dot(u, v), omega0, eta);
        rep.note = buf;
        return rep;
    }
    rep.trigger_met = true;

    const double floor_rate = std::sqrt(2.0 * (1.0 - eta * eta) * orbit.energy);
    const double side = std::sqrt(1.0 - eta * eta);
    const double r0 = norm(u);

    // Grid indices with t in [t0, T/2]; the closing sample at +T/2 wraps to 0.
    const std::size_t n = orbit.count();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
        if (orbit.time_at(i) >= t0 - 1e-12) idx.push_back(i);
    if (idx.size() < 3) {
        rep.note = "too few grid points beyond t0";
        return rep;
    }

    rep.omega_below_eta = true;
    rep.radial_rate_vs_speed = true;
    rep.radial_rate_floor = true;
    rep.linear_growth = true;
    rep.worst_rate_gap = 0.0;

    for (std::size_t k = 0; k < idx.size(); ++k) {
        const std::size_t i = idx[k];
        const double om = diag.omega[i];
        rep.worst_omega = std::max(rep.worst_omega, om);
        if (om >= eta) rep.omega_below_eta = false;

        // One-sided rate at the segment ends, central inside.
        double rate;
        const double r_here = orbit.radius(i);
        if (k == 0) {
            rate = (orbit.radius(idx[1]) - r_here) / (orbit.time_at(idx[1]) - orbit.time_at(i));
        } else if (k + 1 == idx.size()) {
            rate = (r_here - orbit.radius(idx[k - 1])) /
                   (orbit.time_at(i) - orbit.time_at(idx[k - 1]));
        } else {
            rate = (orbit.radius(idx[k + 1]) - orbit.radius(idx[k - 1])) /
                   (orbit.time_at(idx[k + 1]) - orbit.time_at(idx[k - 1]));
        }
        const double gap2 = rate - (side * orbit.speed(i) - tol);
        const double gap3 = rate - (floor_rate - tol);
        rep.worst_rate_gap = std::min(rep.worst_rate_gap, std::min(gap2, gap3));
        if (gap2 < 0.0) rep.radial_rate_vs_speed = false;
        if (gap3 < 0.0) rep.radial_rate_floor = false;

        const double growth_gap =
            r_here - (r0 + floor_rate * (orbit.time_at(i) - t0)) + tol;
        rep.worst_growth_gap = std::min(rep.worst_growth_gap, growth_gap);
        if (growth_gap < 0.0) rep.linear_growth = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Direction drift bound (decay metadata (beta, M0, r0) required)
// ---------------------------------------------------------------------------

struct DriftCheck {
    double drift = 0.0;
    double bound = 0.0;
    double m10 = 0.0;  // M0 / (sqrt(2 (1 - eta^2) H) (beta - 1))
    bool pass = false;
};

/// drift = |u(t1)/|u(t1)| - u(t0)/|u(t0)||, bounded along the proof chain by
/// (A(t0) + M10 / |u(t0)|^(beta-1)) / (sqrt(2(1-eta^2)H) |u(t0)|).
inline DriftCheck direction_drift_check(const AngularDiagnostics& diag,
                                        const PeriodicOrbit& orbit, const Potential& p,
                                        double t0, double t1, double eta,
                                        double tol = 1e-6) {
    if (!p.decay)
        throw unsupported_potential_error("direction drift bound needs (V7) decay metadata");
    if (!(eta > 0.0 && eta < 0.5)) throw validation_error("eta must lie in (0, 1/2)");
    const auto& d = *p.decay;

    std::vector<double> a(orbit.dim), b(orbit.dim);
    orbit.position_at(t0, a);
    orbit.position_at(t1, b);
    const double ra = norm(a), rb = norm(b);
    if (ra < d.r0)
        throw validation_error("|u(t0)| below the decay radius r0");

    DriftCheck out;
    for (int c = 0; c < orbit.dim; ++c) {
        const double diff = b[c] / rb - a[c] / ra;
        out.drift += diff * diff;
    }
    out.drift = std::sqrt(out.drift);

    const double rate = std::sqrt(2.0 * (1.0 - eta * eta) * orbit.energy);
    out.m10 = d.m0 / (rate * (d.beta - 1.0));
    const double area0 = diag.area_rate_at(t0, orbit.period);
    out.bound = (area0 + out.m10 / std::pow(ra, d.beta - 1.0)) / (rate * ra);
    out.pass = out.drift <= out.bound + tol;
    return out;
}

// ---------------------------------------------------------------------------
// Asymptotic direction and cone confinement on the escape tails
// ---------------------------------------------------------------------------

struct DirectionReport {
    std::vector<double> estimate;      // u/|u| at the last grid time before T/2
    double error_to_e = 0.0;           // |estimate - e|
    double confinement_radius = 0.0;   // M11: first tail radius with drift bound < eps
    bool conclusive = false;
    bool confined = false;
    std::size_t checked_samples = 0;
    double worst_gap = 0.0;            // max |u/|u| - e| over checked samples
};

/// Confinement is checked on the two escape tails (t <= t_minus and
/// t >= t_plus) of the natural-frame orbit. The loop symmetry forces the
/// antipodal passage u(0) = -R e, so the middle of the period points along -e
/// by construction; in the local limit those samples belong to the mirror
/// orbit, and the tails at +-T/2 are the surrogate for t -> +-infinity.
inline DirectionReport asymptotic_direction(const PeriodicOrbit& orbit, const Potential& p,
                                            const AngularDiagnostics& diag,
                                            std::span<const double> e, double t_minus,
                                            double t_plus, double eta, double epsilon) {
    if (!p.decay)
        throw unsupported_potential_error("direction confinement needs (V7) decay metadata");
    if (!(epsilon > 0.0)) throw validation_error("cone half-width must be positive");
    const auto& d = *p.decay;
    const int dim = orbit.dim;
    const std::size_t n = orbit.count();

    DirectionReport rep;

    // Direction estimate at the last grid sample (time closest to +T/2).
    {
        const auto u = orbit.position(n - 1);
        const double r = norm(u);
        rep.estimate.resize(dim);
        for (int c = 0; c < dim; ++c) rep.estimate[c] = u[c] / r;
        rep.error_to_e = distance(rep.estimate, e);
    }

    const double rate = std::sqrt(2.0 * (1.0 - eta * eta) * orbit.energy);
    const double m10 = d.m0 / (rate * (d.beta - 1.0));
    auto drift_bound = [&](double area, double r) {
        return (area + m10 / std::pow(r, d.beta - 1.0)) / (rate * r);
    };

    // M11: smallest forward-tail radius whose outward drift bound is below eps.
    bool found = false;
    double m11 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (orbit.time_at(i) < t_plus) continue;
        const double r = orbit.radius(i);
        if (r < d.r0) continue;
        if (drift_bound(diag.area_rate[i], r) < epsilon) {
            if (!found || r < m11) {
                m11 = r;
                found = true;
            }
        }
    }
    if (!found) return rep;  // inconclusive
    rep.conclusive = true;
    rep.confinement_radius = m11;

    rep.confined = true;
    std::vector<double> dir(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = orbit.time_at(i);
        const bool on_tail = (t <= t_minus + 1e-12) || (t >= t_plus - 1e-12);
        if (!on_tail) continue;
        const double r = orbit.radius(i);
        if (r < m11) continue;
        const auto u = orbit.position(i);
        for (int c = 0; c < dim; ++c) dir[c] = u[c] / r;
        const double gap = distance(dir, e);
        rep.worst_gap = std::max(rep.worst_gap, gap);
        ++rep.checked_samples;
        if (gap >= epsilon) rep.confined = false;
    }
    // The wrap sample at +T/2 equals sample 0 and belongs to the forward tail.
    return rep;
}

// ---------------------------------------------------------------------------
// Radial escape profile and the comparison-path action bound
// ---------------------------------------------------------------------------

struct EscapeProfile {
    std::vector<double> times;         // profile ODE clock, starting at 1
    std::vector<double> xi;            // radial coordinate, xi(1) = 1
    double tau_r = 0.0;                // first time with xi = R (interpolated)
    double comparison_action = 0.0;    // (1/sqrt 2) int (1/2 |g'|^2 + H - V(g)) over the path
    double connector_action = 0.0;     // the R-independent [0,1] piece
};

/// Integrates xi' = sqrt(2 (H - V(xi e))) from xi(1) = 1 until xi = R and
/// evaluates the action of the comparison path: two mirrored radial rays plus
/// a fixed unit half-circle connector between -e and +e.
inline EscapeProfile escape_profile(const Potential& p, double energy, double radius,
                                    std::span<const double> e, double step = 1e-3) {
    if (!(radius > 1.0)) throw validation_error("profile needs R > 1");
    if (!(energy > 0.0)) throw validation_error("energy must be positive");

    std::vector<double> x(p.dim);
    auto rate = [&](double xi) {
        for (int c = 0; c < p.dim; ++c) x[c] = xi * e[c];
        return std::sqrt(2.0 * (energy - potential_value(p, x)));
    };
    auto integrand = [&](double xi) {
        // 1/2 xi'^2 + H - V = 2 (H - V) along the profile
        for (int c = 0; c < p.dim; ++c) x[c] = xi * e[c];
        return 2.0 * (energy - potential_value(p, x));
    };

    EscapeProfile out;
    double t = 1.0;
    double xi = 1.0;
    out.times.push_back(t);
    out.xi.push_back(xi);
    double radial_piece = 0.0;
    double f_prev = integrand(xi);
    while (xi < radius) {
        const double k1 = rate(xi);
        const double k2 = rate(xi + 0.5 * step * k1);
        const double k3 = rate(xi + 0.5 * step * k2);
        const double k4 = rate(xi + step * k3);
        const double xi_next = xi + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double f_next = integrand(xi_next);
        if (xi_next >= radius) {
            const double frac = (radius - xi) / (xi_next - xi);
            out.tau_r = t + frac * step;
            const double f_cross = f_prev + frac * (f_next - f_prev);
            radial_piece += 0.5 * (f_prev + f_cross) * (frac * step);
            out.times.push_back(out.tau_r);
            out.xi.push_back(radius);
            xi = radius;
            break;
        }
        radial_piece += 0.5 * (f_prev + f_next) * step;
        xi = xi_next;
        f_prev = f_next;
        t += step;
        out.times.push_back(t);
        out.xi.push_back(xi);
    }

    // Connector: unit half-circle from -e to e in a fixed plane; |phi'| = pi
    // and |phi| = 1, so the integrand is constant.
    const double v_unit = detail::radial_eval(p, 1.0).value;
    out.connector_action = 0.5 * M_PI * M_PI + energy - v_unit;

    out.comparison_action = (2.0 * radial_piece + out.connector_action) / std::sqrt(2.0);
    return out;
}

}  // namespace hyporb
