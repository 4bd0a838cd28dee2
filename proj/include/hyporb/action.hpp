#pragma once

// Fixed-energy action on antiperiodic pinned loops:
//   f(q) = 1/2 * int |q'|^2 dt * int (H - V(q)) dt.
// The kinetic integral is the Dirichlet energy of the piecewise-linear
// interpolant and the potential integral is the periodic rectangle sum, so the
// gradient below is the exact derivative of the discrete value
// (discretize-then-differentiate). Both sums are taken over the stored half
// grid; the sign-flipped half contributes an equal share, which the symmetry
// chain rule folds into the factors of two.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hyporb/errors.hpp"
#include "hyporb/loop.hpp"
#include "hyporb/potential.hpp"
#include "hyporb/vec.hpp"

namespace hyporb {

struct ActionEvaluation {
    double value = 0.0;
    double seminorm_sq = 0.0;         // int |q'|^2
    double potential_integral = 0.0;  // int (H - V(q))
    std::vector<double> gradient;     // (M-1) x dim, interior nodes q_1..q_{M-1}
    std::vector<double> pin_gradient; // symmetry-reduced derivative at the pinned node
};

namespace detail {

inline void require_collision_free(const SymmetricLoop& loop) {
    for (std::size_t j = 0; j <= loop.half_count; ++j)
        if (norm_sq(loop.node(j)) == 0.0)
            throw collision_error("loop node at the origin");
}

// S = (2/h) sum_{j<M} |q_{j+1} - q_j|^2  and  P = 2h sum_{j<M} (H - V(q_j)).
inline void action_sums(const Potential& p, const SymmetricLoop& loop, double energy,
                        double& seminorm_sq, double& potential_integral) {
    const std::size_t m = loop.half_count;
    const double h = loop.grid_step();
    double kin = 0.0, pot = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const auto a = loop.node(j);
        const auto b = loop.node(j + 1);
        double seg = 0.0;
        for (int c = 0; c < loop.dim; ++c) {
            const double d = b[c] - a[c];
            seg += d * d;
        }
        kin += seg;
        pot += energy - potential_value(p, a);
    }
    seminorm_sq = (2.0 / h) * kin;
    potential_integral = 2.0 * h * pot;
}

}  // namespace detail

inline double action_value(const Potential& p, const SymmetricLoop& loop, double energy) {
    detail::require_collision_free(loop);
    double s = 0.0, pi = 0.0;
    detail::action_sums(p, loop, energy, s, pi);
    return 0.5 * s * pi;
}

inline ActionEvaluation evaluate_action(const Potential& p, const SymmetricLoop& loop,
                                        double energy) {
    detail::require_collision_free(loop);
    const std::size_t m = loop.half_count;
    const int dim = loop.dim;
    const double h = loop.grid_step();

    ActionEvaluation out;

    // One pass for V and grad V at the stored nodes 0..M-1.
    std::vector<double> grads(m * dim);
    double kin = 0.0, pot = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const auto a = loop.node(j);
        const auto b = loop.node(j + 1);
        double seg = 0.0;
        for (int c = 0; c < dim; ++c) {
            const double d = b[c] - a[c];
            seg += d * d;
        }
        kin += seg;
        const auto s = evaluate(p, a);
        pot += energy - s.value;
        for (int c = 0; c < dim; ++c) grads[j * dim + c] = s.gradient[c];
    }
    out.seminorm_sq = (2.0 / h) * kin;
    out.potential_integral = 2.0 * h * pot;
    out.value = 0.5 * out.seminorm_sq * out.potential_integral;

    // g_j = 1/2 P dS/dq_j + 1/2 S dP/dq_j, both reduced through the sign flip.
    out.gradient.assign((m - 1) * dim, 0.0);
    const double ck = 2.0 * out.potential_integral / h;  // 1/2 * P * (4/h)
    for (std::size_t j = 1; j < m; ++j) {
        const auto q = loop.node(j);
        const auto qn = loop.node(j + 1);
        const auto qp = loop.node(j - 1);
        auto g = row(out.gradient, j - 1, dim);
        for (int c = 0; c < dim; ++c)
            g[c] = ck * (2.0 * q[c] - qn[c] - qp[c]) -
                   out.seminorm_sq * h * grads[j * dim + c];
    }
    out.pin_gradient.assign(dim, 0.0);
    {
        const auto q0 = loop.node(0);
        const auto q1 = loop.node(1);
        const auto qm = loop.node(m - 1);
        for (int c = 0; c < dim; ++c)
            out.pin_gradient[c] = ck * (2.0 * q0[c] - q1[c] + qm[c]) -
                                  out.seminorm_sq * h * grads[c];
    }
    return out;
}

inline std::vector<double> action_gradient(const Potential& p, const SymmetricLoop& loop,
                                           double energy) {
    return evaluate_action(p, loop, energy).gradient;
}

/// The closed-form pairing <f'(q), q> with ||q||^2 read as the seminorm:
/// S * int (H - V(q) - 1/2 (grad V(q), q)) dt, discretized with the same sums
/// as the action itself.
inline double radial_pairing(const Potential& p, const SymmetricLoop& loop, double energy) {
    detail::require_collision_free(loop);
    const std::size_t m = loop.half_count;
    const double h = loop.grid_step();
    double s = 0.0, unused = 0.0;
    detail::action_sums(p, loop, energy, s, unused);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const auto q = loop.node(j);
        const auto sample = evaluate(p, q);
        acc += energy - sample.value - 0.5 * dot(sample.gradient, q);
    }
    return s * 2.0 * h * acc;
}

/// sum_j g_j . q_j over the stored half grid, pinned node included; agrees with
/// radial_pairing to rounding (the interior sum alone misses the O(h) pin force).
inline double gradient_loop_pairing(const ActionEvaluation& eval, const SymmetricLoop& loop) {
    double acc = dot(eval.pin_gradient, loop.node(0));
    for (std::size_t j = 1; j < loop.half_count; ++j)
        acc += dot(row(eval.gradient, j - 1, loop.dim), loop.node(j));
    return acc;
}

}  // namespace hyporb
