#pragma once

// Shared test utilities: deterministic random loops and the finite-difference
// gradient oracle used to pin down expected values independently of the
// implementation path.

#include <cmath>
#include <random>
#include <vector>

#include "hyporb/action.hpp"
#include "hyporb/loop.hpp"
#include "hyporb/potential.hpp"

namespace testutil {

/// Circle of the given radius with an iid perturbation of the interior nodes.
/// The amplitude is scaled so the loop stays safely collision-free.
inline hyporb::SymmetricLoop random_loop(double radius, std::size_t half_count, int dim,
                                         double amplitude, unsigned seed) {
    std::vector<double> xi(dim, 0.0), eta(dim, 0.0);
    xi[0] = 1.0;
    eta[1] = 1.0;
    auto loop = hyporb::build_circular(radius, xi, eta, half_count);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pick(-1.0, 1.0);
    for (std::size_t j = 1; j < half_count; ++j) {
        auto q = loop.node(j);
        for (int c = 0; c < dim; ++c) q[c] += amplitude * pick(rng);
    }
    return loop;
}

/// Central finite differences of the discrete action with respect to every
/// interior degree of freedom.
inline std::vector<double> fd_action_gradient(const hyporb::Potential& p,
                                              const hyporb::SymmetricLoop& loop,
                                              double energy, double rel_step = 1e-6) {
    hyporb::SymmetricLoop work = loop;
    const std::size_t m = loop.half_count;
    const int dim = loop.dim;
    std::vector<double> grad((m - 1) * dim);
    for (std::size_t j = 1; j < m; ++j) {
        for (int c = 0; c < dim; ++c) {
            auto q = work.node(j);
            const double saved = q[c];
            const double h = rel_step * std::max(1.0, std::abs(saved));
            q[c] = saved + h;
            const double fp = hyporb::action_value(p, work, energy);
            q[c] = saved - h;
            const double fm = hyporb::action_value(p, work, energy);
            q[c] = saved;
            grad[(j - 1) * dim + c] = (fp - fm) / (2.0 * h);
        }
    }
    return grad;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testutil
