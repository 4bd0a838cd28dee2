#pragma once

// Periodic orbits of u'' + grad V(u) = 0 at energy H: rescaling of loop
// minimizers to T-periodic solutions, time translation, an independent RK4
// integrator with a collision guard, residual diagnostics against the motion
// and energy equations, and the H-trichotomy classifier.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hyporb/action.hpp"
#include "hyporb/errors.hpp"
#include "hyporb/loop.hpp"
#include "hyporb/potential.hpp"
#include "hyporb/vec.hpp"

namespace hyporb {

/// One period of a T-periodic solution on a uniform grid t_i = t_start + i dt,
/// i in [0, count); the sample at t_start + T wraps to index 0.
struct PeriodicOrbit {
    int dim = 2;
    double period = 0.0;
    double energy = 0.0;
    double boundary_radius = 0.0;  // R of the generating loop
    double t_start = 0.0;
    double dt = 0.0;
    std::vector<double> positions;   // count x dim
    std::vector<double> velocities;  // count x dim (departing branch at pins)
    std::vector<std::size_t> pin_indices;    // constraint samples (velocity corners)
    std::vector<double> arrival_velocities;  // pin_indices.size() x dim

    std::size_t count() const { return positions.size() / std::size_t(dim); }
    double time_at(std::size_t i) const { return t_start + double(i) * dt; }
    std::span<const double> position(std::size_t i) const { return row(positions, i, dim); }
    std::span<const double> velocity(std::size_t i) const { return row(velocities, i, dim); }
    double radius(std::size_t i) const { return norm(position(i)); }
    double speed(std::size_t i) const { return norm(velocity(i)); }

    /// Periodic piecewise-linear interpolation.
    void position_at(double t, std::span<double> out) const { interp(positions, t, out); }
    void velocity_at(double t, std::span<double> out) const { interp(velocities, t, out); }
    double radius_at(double t) const {
        std::vector<double> x(dim);
        position_at(t, x);
        return norm(x);
    }

private:
    void interp(const std::vector<double>& data, double t, std::span<double> out) const {
        const std::size_t n = count();
        double s = (t - t_start) / dt;
        double wrapped = std::fmod(s, double(n));
        if (wrapped < 0.0) wrapped += double(n);
        std::size_t i = std::size_t(wrapped);
        if (i >= n) i = 0;
        const double frac = wrapped - double(i);
        const auto a = row(data, i, dim);
        const auto b = row(data, (i + 1) % n, dim);
        for (int c = 0; c < dim; ++c) out[c] = (1.0 - frac) * a[c] + frac * b[c];
    }
};

/// Lemma-style rescaling: T^2 = (1/2 int |q'|^2) / int (H - V(q)); the orbit is
/// u(t) = q((t + T/2)/T) over [-T/2, T/2], velocities differentiated from the
/// loop (the energy relation stays free as an independent check).
///
/// The pinned nodes t = +-T/2 (at +Re) and t = 0 (at -Re) are constraint
/// points: the minimizer's velocity may jump there, so central differences
/// across them would mix the two one-sided branches. Those two samples carry
/// the second-order one-sided (departing) estimate instead; the arriving
/// branches are kept separately for corner diagnostics.
inline PeriodicOrbit maupertuis_rescale(const Potential& p, const SymmetricLoop& loop,
                                        double energy) {
    detail::require_collision_free(loop);
    double seminorm_sq = 0.0, potential_integral = 0.0;
    detail::action_sums(p, loop, energy, seminorm_sq, potential_integral);
    if (seminorm_sq == 0.0) throw degenerate_loop_error("constant loop cannot be rescaled");
    const double period = std::sqrt(0.5 * seminorm_sq / potential_integral);

    const auto kin = kinematics(loop);
    const std::size_t n = loop.full_count();
    const int dim = loop.dim;

    PeriodicOrbit orbit;
    orbit.dim = dim;
    orbit.period = period;
    orbit.energy = energy;
    orbit.boundary_radius = loop.radius;
    orbit.t_start = -0.5 * period;
    orbit.dt = period / double(n);
    orbit.positions = kin.positions;
    orbit.velocities = kin.velocities;
    for (auto& v : orbit.velocities) v /= period;

    orbit.pin_indices = {0, n / 2};
    orbit.arrival_velocities.assign(2 * dim, 0.0);
    for (int which = 0; which < 2; ++which) {
        const std::size_t k = orbit.pin_indices[which];
        const auto u0 = row(orbit.positions, k, dim);
        const auto u1 = row(orbit.positions, (k + 1) % n, dim);
        const auto u2 = row(orbit.positions, (k + 2) % n, dim);
        const auto um1 = row(orbit.positions, (k + n - 1) % n, dim);
        const auto um2 = row(orbit.positions, (k + n - 2) % n, dim);
        auto v = row(orbit.velocities, k, dim);
        for (int c = 0; c < dim; ++c) {
            v[c] = (-3.0 * u0[c] + 4.0 * u1[c] - u2[c]) / (2.0 * orbit.dt);
            orbit.arrival_velocities[which * dim + c] =
                (3.0 * u0[c] - 4.0 * um1[c] + um2[c]) / (2.0 * orbit.dt);
        }
    }
    return orbit;
}

/// phi(t) -> phi(t + t0): samples are copied exactly; only time labels move
/// (reduced modulo the period and rotated back into ascending order).
inline PeriodicOrbit time_translate(const PeriodicOrbit& orbit, double t0) {
    const double T = orbit.period;
    const double shift = t0 - T * std::floor(t0 / T + 0.5);
    if (shift == 0.0) return orbit;

    const std::size_t n = orbit.count();
    auto wrap = [&](double t) { return t - T * std::floor((t + 0.5 * T) / T); };

    std::size_t first = 0;
    double best = wrap(orbit.time_at(0) - shift);
    for (std::size_t i = 1; i < n; ++i) {
        const double w = wrap(orbit.time_at(i) - shift);
        if (w < best) {
            best = w;
            first = i;
        }
    }

    PeriodicOrbit out;
    out.dim = orbit.dim;
    out.period = T;
    out.energy = orbit.energy;
    out.boundary_radius = orbit.boundary_radius;
    out.t_start = best;
    out.dt = orbit.dt;
    out.positions.resize(orbit.positions.size());
    out.velocities.resize(orbit.velocities.size());
    const int dim = orbit.dim;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = (first + i) % n;
        for (int c = 0; c < dim; ++c) {
            out.positions[i * dim + c] = orbit.positions[src * dim + c];
            out.velocities[i * dim + c] = orbit.velocities[src * dim + c];
        }
    }
    out.arrival_velocities = orbit.arrival_velocities;
    out.pin_indices = orbit.pin_indices;
    for (auto& k : out.pin_indices) k = (k + n - first) % n;
    return out;
}

struct ResidualReport {
    double energy_residual = 0.0;  // sup |1/2 |u'|^2 + V(u) - H| (both branches at pins)
    double ode_residual = 0.0;     // sup |u'' + grad V(u)| away from the pin corners
    double virial_residual = 0.0;  // |int (2H - 2V - (grad V, u)) dt| over a period
    double virial_identity_residual = 0.0;  // same integral minus the pin impulse terms
    double corner_impulse = 0.0;   // max |v_arrive - v_depart| over pin samples
    double lipschitz = 0.0;        // sup |du| / dt
    double speed_bound = 0.0;      // M5 = sup sqrt(2 (H - V(u)))
};

/// The pinned samples are constraint points where the minimizer's velocity may
/// jump, so d/dt (u, u') integrates to the sum of pin boundary terms rather
/// than zero; virial_identity_residual measures the identity in that corrected
/// form, while virial_residual keeps the raw periodic integral.
inline ResidualReport residuals(const Potential& p, const PeriodicOrbit& orbit) {
    const std::size_t n = orbit.count();
    const int dim = orbit.dim;
    const double dt = orbit.dt;

    ResidualReport rep;
    double virial_sum = 0.0;
    std::vector<double> acc(dim);
    auto is_pin = [&](std::size_t i) {
        for (auto k : orbit.pin_indices)
            if (k == i) return true;
        return false;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto u = orbit.position(i);
        const auto v = orbit.velocity(i);
        const auto sample = evaluate(p, u);

        rep.energy_residual = std::max(
            rep.energy_residual,
            std::abs(0.5 * norm_sq(v) + sample.value - orbit.energy));

        const auto next = orbit.position((i + 1) % n);
        if (!is_pin(i)) {
            const auto prev = orbit.position((i + n - 1) % n);
            for (int c = 0; c < dim; ++c)
                acc[c] = (next[c] - 2.0 * u[c] + prev[c]) / (dt * dt) + sample.gradient[c];
            rep.ode_residual = std::max(rep.ode_residual, norm(acc));
        }

        virial_sum += 2.0 * orbit.energy - (2.0 * sample.value + dot(u, sample.gradient));

        rep.lipschitz = std::max(rep.lipschitz, distance(next, u) / dt);
        rep.speed_bound = std::max(rep.speed_bound,
                                   std::sqrt(2.0 * (orbit.energy - sample.value)));
    }
    rep.virial_residual = std::abs(virial_sum * dt);

    double impulse_terms = 0.0;
    for (std::size_t which = 0; which < orbit.pin_indices.size(); ++which) {
        const std::size_t k = orbit.pin_indices[which];
        const auto u = orbit.position(k);
        const auto v_dep = orbit.velocity(k);
        const std::span<const double> v_arr{
            orbit.arrival_velocities.data() + which * dim, std::size_t(dim)};
        rep.energy_residual = std::max(
            rep.energy_residual,
            std::abs(0.5 * norm_sq(v_arr) + potential_value(p, u) - orbit.energy));
        double jump = 0.0, term = 0.0;
        for (int c = 0; c < dim; ++c) {
            jump += (v_arr[c] - v_dep[c]) * (v_arr[c] - v_dep[c]);
            term += u[c] * (v_arr[c] - v_dep[c]);
        }
        rep.corner_impulse = std::max(rep.corner_impulse, std::sqrt(jump));
        impulse_terms += term;
    }
    rep.virial_identity_residual = std::abs(virial_sum * dt - impulse_terms);
    return rep;
}

// ---------------------------------------------------------------------------
// Independent integrator and trajectory classification
// ---------------------------------------------------------------------------

enum class TrajectoryStatus { complete, aborted_near_collision };

struct Trajectory {
    int dim = 2;
    TrajectoryStatus status = TrajectoryStatus::complete;
    std::vector<double> times;
    std::vector<double> positions;   // times.size() x dim
    std::vector<double> velocities;  // times.size() x dim

    std::size_t count() const { return times.size(); }
    std::span<const double> position(std::size_t i) const { return row(positions, i, dim); }
    std::span<const double> velocity(std::size_t i) const { return row(velocities, i, dim); }
};

/// Classical fixed-step RK4 on (u, u') with u'' = accel(u). Aborts (keeping the
/// partial trajectory) when any stage or step lands inside the guard radius.
/// record_stride > 1 keeps every k-th step (the final step is always kept).
template <class Accel>
Trajectory integrate_ode_with(Accel&& accel, std::span<const double> u0,
                              std::span<const double> v0, double t_begin, double t_end,
                              double step, double guard_radius,
                              std::size_t record_stride = 1) {
    if (!(step > 0.0)) throw validation_error("step must be positive");
    if (t_end <= t_begin) throw validation_error("time span must be increasing");
    if (record_stride == 0) throw validation_error("record stride must be positive");
    const int dim = int(u0.size());
    if (norm(u0) <= guard_radius)
        throw validation_error("initial point inside the guard radius");

    const auto steps = std::size_t(std::ceil((t_end - t_begin) / step - 1e-12));
    Trajectory traj;
    traj.dim = dim;
    const std::size_t recorded = steps / record_stride + 2;
    traj.times.reserve(recorded);
    traj.positions.reserve(recorded * dim);
    traj.velocities.reserve(recorded * dim);

    std::vector<double> u(u0.begin(), u0.end());
    std::vector<double> v(v0.begin(), v0.end());
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.positions.insert(traj.positions.end(), u.begin(), u.end());
        traj.velocities.insert(traj.velocities.end(), v.begin(), v.end());
    };
    record(t_begin);

    std::vector<double> ku1(dim), ku2(dim), ku3(dim), ku4(dim);
    std::vector<double> kv1(dim), kv2(dim), kv3(dim), kv4(dim);
    std::vector<double> tmp(dim);
    const double g2 = guard_radius * guard_radius;
    auto blocked = [&](const std::vector<double>& x) { return norm_sq(x) <= g2; };

    double t = t_begin;
    for (std::size_t i = 0; i < steps; ++i) {
        const double h = std::min(step, t_end - t);

        accel(u, kv1);
        for (int c = 0; c < dim; ++c) ku1[c] = v[c];

        for (int c = 0; c < dim; ++c) tmp[c] = u[c] + 0.5 * h * ku1[c];
        if (blocked(tmp)) { traj.status = TrajectoryStatus::aborted_near_collision; return traj; }
        accel(tmp, kv2);
        for (int c = 0; c < dim; ++c) ku2[c] = v[c] + 0.5 * h * kv1[c];

        for (int c = 0; c < dim; ++c) tmp[c] = u[c] + 0.5 * h * ku2[c];
        if (blocked(tmp)) { traj.status = TrajectoryStatus::aborted_near_collision; return traj; }
        accel(tmp, kv3);
        for (int c = 0; c < dim; ++c) ku3[c] = v[c] + 0.5 * h * kv2[c];

        for (int c = 0; c < dim; ++c) tmp[c] = u[c] + h * ku3[c];
        if (blocked(tmp)) { traj.status = TrajectoryStatus::aborted_near_collision; return traj; }
        accel(tmp, kv4);
        for (int c = 0; c < dim; ++c) ku4[c] = v[c] + h * kv3[c];

        for (int c = 0; c < dim; ++c) {
            u[c] += h / 6.0 * (ku1[c] + 2.0 * ku2[c] + 2.0 * ku3[c] + ku4[c]);
            v[c] += h / 6.0 * (kv1[c] + 2.0 * kv2[c] + 2.0 * kv3[c] + kv4[c]);
        }
        t += h;
        if (blocked(u)) { traj.status = TrajectoryStatus::aborted_near_collision; return traj; }
        if ((i + 1) % record_stride == 0 || i + 1 == steps) record(t);
    }
    return traj;
}

inline Trajectory integrate_ode(const Potential& p, std::span<const double> u0,
                                std::span<const double> v0, double t_begin, double t_end,
                                double step, double guard_radius = 1e-6,
                                std::size_t record_stride = 1) {
    const int dim = int(u0.size());
    if (dim != p.dim) throw validation_error("state dimension differs from the potential");
    auto accel = [&p](const std::vector<double>& x, std::vector<double>& a) {
        const auto s = evaluate(p, x);
        for (std::size_t c = 0; c < a.size(); ++c) a[c] = -s.gradient[c];
    };
    return integrate_ode_with(accel, u0, v0, t_begin, t_end, step, guard_radius,
                              record_stride);
}

enum class OrbitClass { elliptic, parabolic, hyperbolic, undetermined };

inline const char* orbit_class_name(OrbitClass c) {
    switch (c) {
        case OrbitClass::elliptic: return "elliptic";
        case OrbitClass::parabolic: return "parabolic";
        case OrbitClass::hyperbolic: return "hyperbolic";
        case OrbitClass::undetermined: return "undetermined";
    }
    return "?";
}

/// Finite-window trichotomy surrogate: escape past r_far with terminal speed
/// above/below the tolerance vs bounded recurrent motion.
inline OrbitClass classify_orbit(const Trajectory& traj, double r_far, double speed_tol,
                                 double recurrence_tol = 1e-3) {
    const std::size_t n = traj.count();
    if (n < 3) return OrbitClass::undetermined;

    double max_radius = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_radius = std::max(max_radius, norm(traj.position(i)));

    if (max_radius >= r_far) {
        const double terminal_speed = norm(traj.velocity(n - 1));
        return terminal_speed > speed_tol ? OrbitClass::hyperbolic : OrbitClass::parabolic;
    }

    // Bounded: look for a return to the initial state after the early segment.
    const double span = traj.times.back() - traj.times.front();
    const double scale = 1.0 + norm(traj.position(0)) + norm(traj.velocity(0));
    for (std::size_t i = 1; i < n; ++i) {
        if (traj.times[i] - traj.times.front() < 0.1 * span) continue;
        const double gap = distance(traj.position(i), traj.position(0)) +
                           distance(traj.velocity(i), traj.velocity(0));
        if (gap <= recurrence_tol * scale) return OrbitClass::elliptic;
    }
    return OrbitClass::undetermined;
}

/// Least-squares conic fit 1/r = A + B cos(theta) + C sin(theta) in the plane;
/// eccentricity = |(B, C)| / A. Dimension 2 only (the Kepler oracle's home).
inline double conic_eccentricity(const Trajectory& traj) {
    if (traj.dim != 2) throw validation_error("conic fit implemented for dimension 2");
    double s11 = 0, s1c = 0, s1s = 0, scc = 0, scs = 0, sss = 0;
    double b1 = 0, bc = 0, bs = 0;
    for (std::size_t i = 0; i < traj.count(); ++i) {
        const auto x = traj.position(i);
        const double r = norm(x);
        if (r == 0.0) continue;
        const double c = x[0] / r, s = x[1] / r, w = 1.0 / r;
        s11 += 1.0;  s1c += c;      s1s += s;
        scc += c * c; scs += c * s; sss += s * s;
        b1 += w;      bc += w * c;  bs += w * s;
    }
    // 3x3 normal equations via Cramer's rule.
    const double det = s11 * (scc * sss - scs * scs) - s1c * (s1c * sss - scs * s1s) +
                       s1s * (s1c * scs - scc * s1s);
    if (det == 0.0) throw validation_error("degenerate conic fit");
    const double detA = b1 * (scc * sss - scs * scs) - s1c * (bc * sss - scs * bs) +
                        s1s * (bc * scs - scc * bs);
    const double detB = s11 * (bc * sss - bs * scs) - b1 * (s1c * sss - scs * s1s) +
                        s1s * (s1c * bs - bc * s1s);
    const double detC = s11 * (scc * bs - scs * bc) - s1c * (s1c * bs - bc * s1s) +
                        b1 * (s1c * scs - scc * s1s);
    const double A = detA / det, B = detB / det, C = detC / det;
    if (A == 0.0) throw validation_error("degenerate conic fit");
    return std::sqrt(B * B + C * C) / A;
}

}  // namespace hyporb
