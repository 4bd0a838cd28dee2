#pragma once

// Collision-free minimization of the fixed-energy action over the interior
// half-grid nodes: descent along the H1-seminorm (Sobolev) gradient with
// Barzilai-Borwein trial steps and monotone Armijo backtracking. The kinetic
// part of the Hessian is the pinned second-difference matrix, so solving it
// once per step (Thomas algorithm) flattens the O(M^2) stiffness that stalls
// the plain Euclidean gradient above tolerance on fine grids. Trial steps that
// would push a node inside the guard radius are rejected by shrinking, so
// every accepted iterate is collision-free and the f sequence is
// non-increasing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "hyporb/action.hpp"
#include "hyporb/errors.hpp"
#include "hyporb/loop.hpp"
#include "hyporb/potential.hpp"

namespace hyporb {

struct MinimizeOptions {
    std::size_t max_iterations = 20000;
    double gradient_tol = 1e-8;     // relative: ||g||_inf <= tol * max(1, f)
    double guard_radius = 0.0;      // 0 => caller supplies; must stay < loop radius
    double initial_step = 0.0;      // 0 => scale-based automatic choice
    double backtrack = 0.5;
    double armijo_c = 1e-4;
    std::uint64_t seed = 0;         // degenerate-start perturbation
};

enum class MinimizeOutcome { converged, iteration_cap, line_search_stalled, collision_trap };

struct MinimizeStats {
    std::size_t iterations = 0;
    double initial_value = 0.0;
    double final_value = 0.0;
    double final_grad_norm = 0.0;   // max norm
    double min_radius_seen = 0.0;   // over accepted iterates
    MinimizeOutcome outcome = MinimizeOutcome::converged;
    bool perturbed_start = false;
    bool guard_proximity_warning = false;  // min radius within 10% of the guard
    std::vector<double> value_history;     // accepted f values, start included
};

struct MinimizeResult {
    SymmetricLoop loop;
    MinimizeStats stats;
};

class nonconvergence_error : public error {
public:
    nonconvergence_error(const std::string& what, SymmetricLoop best_loop, MinimizeStats s)
        : error(what), best(std::move(best_loop)), stats(std::move(s)) {}
    SymmetricLoop best;
    MinimizeStats stats;
};

class collision_trap_error : public error {
public:
    collision_trap_error(const std::string& what, SymmetricLoop best_loop, MinimizeStats s)
        : error(what), best(std::move(best_loop)), stats(std::move(s)) {}
    SymmetricLoop best;
    MinimizeStats stats;
};

namespace detail {

inline double interior_min_radius(const SymmetricLoop& loop) {
    double best = loop.radius;  // pins sit at radius R
    for (std::size_t j = 1; j < loop.half_count; ++j)
        best = std::min(best, norm(loop.node(j)));
    return best;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Solves tridiag(-1, 2, -1) d = b for each of the dim interleaved components
/// (the pinned second-difference matrix; Dirichlet ends). The elimination
/// coefficients are precomputed once since the matrix never changes.
class PinnedLaplaceSolver {
public:
    PinnedLaplaceSolver(std::size_t rows, int dim) : rows_(rows), dim_(dim) {
        pivots_.resize(rows_);
        double diag = 2.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            pivots_[i] = diag;
            diag = 2.0 - 1.0 / diag;
        }
    }

    void solve(const std::vector<double>& b, std::vector<double>& d) const {
        d.assign(b.begin(), b.end());
        for (int comp = 0; comp < dim_; ++comp) {
            // forward sweep
            for (std::size_t i = 1; i < rows_; ++i)
                d[i * dim_ + comp] += d[(i - 1) * dim_ + comp] / pivots_[i - 1];
            // back substitution
            d[(rows_ - 1) * dim_ + comp] /= pivots_[rows_ - 1];
            for (std::size_t i = rows_ - 1; i-- > 0;)
                d[i * dim_ + comp] =
                    (d[i * dim_ + comp] + d[(i + 1) * dim_ + comp]) / pivots_[i];
        }
    }

private:
    std::size_t rows_;
    int dim_;
    std::vector<double> pivots_;
};

}  // namespace detail

inline MinimizeResult minimize_loop(const Potential& p, const SymmetricLoop& start,
                                    double energy, const MinimizeOptions& opt) {
    if (!(energy > 0.0)) throw validation_error("energy must be positive");
    if (!(opt.guard_radius > 0.0)) throw validation_error("guard radius must be positive");
    if (opt.guard_radius >= start.radius)
        throw validation_error("guard radius must be smaller than the boundary radius");
    if (!(opt.backtrack > 0.0 && opt.backtrack < 1.0))
        throw validation_error("backtracking factor must lie in (0,1)");
    if (!(opt.gradient_tol > 0.0)) throw validation_error("gradient tolerance must be positive");
    if (detail::interior_min_radius(start) <= opt.guard_radius)
        throw validation_error("start loop already violates the guard radius");

    SymmetricLoop work = start;
    const std::size_t m = work.half_count;
    const int dim = work.dim;
    const std::size_t ndof = (m - 1) * dim;

    MinimizeStats stats;

    // Degenerate start: a critical circle has zero radial pairing and the
    // plain gradient step cannot leave it; nudge the interior nodes.
    {
        bool circular = true;
        for (std::size_t j = 1; j < m && circular; ++j)
            circular = std::abs(norm(work.node(j)) - work.radius) <= 1e-10 * work.radius;
        if (circular) {
            const double pairing = radial_pairing(p, work, energy);
            const double scale = std::abs(action_value(p, work, energy)) + 1.0;
            if (std::abs(pairing) <= 1e-8 * scale) {
                std::mt19937_64 rng(opt.seed);
                std::uniform_real_distribution<double> pick(-1.0, 1.0);
                for (std::size_t j = 1; j < m; ++j) {
                    auto q = work.node(j);
                    for (int c = 0; c < dim; ++c) q[c] += 1e-6 * work.radius * pick(rng);
                }
                stats.perturbed_start = true;
            }
        }
    }

    auto pack = [&](std::vector<double>& z) {
        for (std::size_t j = 1; j < m; ++j) {
            const auto q = work.node(j);
            for (int c = 0; c < dim; ++c) z[(j - 1) * dim + c] = q[c];
        }
    };
    auto unpack = [&](const std::vector<double>& z) {
        for (std::size_t j = 1; j < m; ++j) {
            auto q = work.node(j);
            for (int c = 0; c < dim; ++c) q[c] = z[(j - 1) * dim + c];
        }
    };
    auto feasible = [&](const std::vector<double>& z) {
        const double g2 = opt.guard_radius * opt.guard_radius;
        for (std::size_t j = 0; j + dim <= z.size(); j += dim) {
            double r2 = 0.0;
            for (int c = 0; c < dim; ++c) r2 += z[j + c] * z[j + c];
            if (r2 <= g2) return false;
        }
        return true;
    };

    std::vector<double> z(ndof), z_new(ndof), direction(ndof);
    pack(z);

    const detail::PinnedLaplaceSolver laplace(m - 1, dim);

    ActionEvaluation eval = evaluate_action(p, work, energy);
    double f = eval.value;
    std::vector<double> g = eval.gradient;
    stats.initial_value = f;
    stats.value_history.push_back(f);
    stats.min_radius_seen = detail::interior_min_radius(work);

    auto finish = [&](MinimizeOutcome outcome) {
        stats.outcome = outcome;
        stats.final_value = f;
        stats.final_grad_norm = detail::max_abs(g);
        const double mr = detail::interior_min_radius(work);
        stats.min_radius_seen = std::min(stats.min_radius_seen, mr);
        stats.guard_proximity_warning = mr <= 1.1 * opt.guard_radius;
    };

    double step = opt.initial_step;
    bool have_step = step > 0.0;

    for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
        const double gmax = detail::max_abs(g);
        if (gmax <= opt.gradient_tol * std::max(1.0, std::abs(f))) {
            finish(MinimizeOutcome::converged);
            return {work, stats};
        }

        // Sobolev direction: the pinned kinetic Hessian is
        // (2 P / h) tridiag(-1,2,-1) per component, so d solves that system.
        laplace.solve(g, direction);
        const double h = work.grid_step();
        const double pre_scale = h / (2.0 * eval.potential_integral);
        for (auto& x : direction) x *= pre_scale;
        const double slope = dot(g, direction);  // positive: K is SPD

        if (!have_step) {
            double dmax = detail::max_abs(direction);
            step = (dmax > 0.0) ? std::min(1.0, 0.1 * std::max(1.0, work.radius) / dmax)
                                : 1.0;
            have_step = true;
        }

        double a = std::clamp(step, 1e-16, 1e8);
        bool accepted = false;
        bool guard_blocked = false;
        double f_new = f;
        for (int ls = 0; ls < 120 && !accepted; ++ls) {
            for (std::size_t i = 0; i < ndof; ++i) z_new[i] = z[i] - a * direction[i];
            if (!feasible(z_new)) {
                guard_blocked = true;
                a *= opt.backtrack;
                continue;
            }
            unpack(z_new);
            f_new = action_value(p, work, energy);
            // strict decrease required: a sufficient-decrease bound that rounds
            // back to f would accept zero-progress steps forever
            if (f_new < f && f_new <= f - opt.armijo_c * a * slope) {
                accepted = true;
                break;
            }
            a *= opt.backtrack;
        }
        if (!accepted) {
            unpack(z);  // restore the best iterate
            stats.iterations = iter;
            finish(guard_blocked ? MinimizeOutcome::collision_trap
                                 : MinimizeOutcome::line_search_stalled);
            if (guard_blocked)
                throw collision_trap_error(
                    "line search underflow against the guard radius", work, stats);
            throw nonconvergence_error("line search stalled before reaching tolerance",
                                       work, stats);
        }

        eval = evaluate_action(p, work, energy);
        // Barzilai-Borwein step in the preconditioned metric: with s = -a d and
        // K d = g, s.Ks = a^2 (d.g) and s.y uses the raw gradient change.
        double dy = 0.0;
        for (std::size_t i = 0; i < ndof; ++i)
            dy += direction[i] * (eval.gradient[i] - g[i]);
        step = (dy > 0.0) ? a * slope / dy : a * 2.0;

        z.swap(z_new);
        f = f_new;
        g = eval.gradient;
        stats.iterations = iter + 1;
        stats.value_history.push_back(f);
        stats.min_radius_seen =
            std::min(stats.min_radius_seen, detail::interior_min_radius(work));
    }

    finish(MinimizeOutcome::iteration_cap);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "no convergence in %zu iterations (|g| = %.3e)",
                  opt.max_iterations, stats.final_grad_norm);
    throw nonconvergence_error(buf, work, stats);
}

}  // namespace hyporb
