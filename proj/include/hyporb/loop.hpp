#pragma once

// Antiperiodic boundary-pinned loops q : [0,1] -> R^N with q(t + 1/2) = -q(t)
// and q(0) = q(1) = R e, discretized on the uniform half-period grid
// t_j = j/(2M), j = 0..M. The second half is reconstructed by the sign flip,
// so the free unknowns are exactly the interior half-grid nodes q_1..q_{M-1}.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hyporb/errors.hpp"
#include "hyporb/vec.hpp"

namespace hyporb {

struct SymmetricLoop {
    int dim = 2;
    double radius = 1.0;            // R = |q(0)|
    std::vector<double> direction;  // boundary direction e (unit)
    std::size_t half_count = 64;    // M; nodes 0..M cover [0, 1/2]
    std::vector<double> nodes;      // (M+1) x dim row-major; nodes 0 and M are pinned

    std::size_t full_count() const { return 2 * half_count; }
    double grid_step() const { return 1.0 / double(full_count()); }

    std::span<const double> node(std::size_t j) const { return row(nodes, j, dim); }
    std::span<double> node(std::size_t j) { return row(nodes, j, dim); }

    /// Full-period sample k in [0, 2M): the stored half plus its sign-flipped copy.
    void full_node(std::size_t k, std::span<double> out) const {
        if (k <= half_count) {
            const auto q = node(k);
            for (int c = 0; c < dim; ++c) out[c] = q[c];
        } else {
            const auto q = node(k - half_count);
            for (int c = 0; c < dim; ++c) out[c] = -q[c];
        }
    }
};

namespace detail {

inline void pin_endpoints(SymmetricLoop& loop) {
    for (int c = 0; c < loop.dim; ++c) {
        loop.nodes[c] = loop.radius * loop.direction[c];
        loop.nodes[loop.half_count * loop.dim + c] = -loop.radius * loop.direction[c];
    }
}

inline void validate_loop_shape(double radius, std::span<const double> e, std::size_t M) {
    if (!(radius > 0.0)) throw validation_error("loop radius must be positive");
    if (M < 8) throw validation_error("half-grid count must be at least 8");
    if (e.size() < 2) throw validation_error("loop dimension must be at least 2");
    if (std::abs(norm(e) - 1.0) > 1e-9)
        throw validation_error("boundary direction must be a unit vector");
}

}  // namespace detail

/// Circular comparison loop Q(t) = R (xi cos 2 pi t + eta sin 2 pi t).
inline SymmetricLoop build_circular(double radius, std::span<const double> xi,
                                    std::span<const double> eta, std::size_t half_count) {
    if (xi.size() != eta.size()) throw invalid_frame_error("frame vectors differ in size");
    if (std::abs(norm(xi) - 1.0) > 1e-12 || std::abs(norm(eta) - 1.0) > 1e-12 ||
        std::abs(dot(xi, eta)) > 1e-12)
        throw invalid_frame_error("circular frame must be orthonormal");
    detail::validate_loop_shape(radius, xi, half_count);

    SymmetricLoop loop;
    loop.dim = int(xi.size());
    loop.radius = radius;
    loop.direction.assign(xi.begin(), xi.end());
    loop.half_count = half_count;
    loop.nodes.resize((half_count + 1) * xi.size());
    for (std::size_t j = 1; j < half_count; ++j) {
        const double t = double(j) / double(2 * half_count);
        const double cs = std::cos(2.0 * M_PI * t);
        const double sn = std::sin(2.0 * M_PI * t);
        auto q = loop.node(j);
        for (std::size_t c = 0; c < xi.size(); ++c) q[c] = radius * (cs * xi[c] + sn * eta[c]);
    }
    detail::pin_endpoints(loop);
    return loop;
}

struct LoopKinematics {
    std::vector<double> positions;   // 2M x dim, full period
    std::vector<double> velocities;  // 2M x dim, central differences
    double seminorm_sq = 0.0;        // trapezoid integral of |q'|^2
    double min_radius = 0.0;
    std::vector<double> mean;
};

inline LoopKinematics kinematics(const SymmetricLoop& loop) {
    const std::size_t n = loop.full_count();
    const int dim = loop.dim;
    const double h = loop.grid_step();

    LoopKinematics out;
    out.positions.resize(n * dim);
    out.velocities.resize(n * dim);
    out.mean.assign(dim, 0.0);

    for (std::size_t k = 0; k < n; ++k) loop.full_node(k, row(out.positions, k, dim));

    double min_r2 = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto x = row(out.positions, k, dim);
        const double r2 = norm_sq(x);
        if (min_r2 < 0.0 || r2 < min_r2) min_r2 = r2;
        for (int c = 0; c < dim; ++c) out.mean[c] += x[c];
    }
    out.min_radius = std::sqrt(min_r2);
    for (int c = 0; c < dim; ++c) out.mean[c] /= double(n);

    double ssq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto next = row(out.positions, (k + 1) % n, dim);
        const auto prev = row(out.positions, (k + n - 1) % n, dim);
        auto v = row(out.velocities, k, dim);
        for (int c = 0; c < dim; ++c) v[c] = (next[c] - prev[c]) / (2.0 * h);
        ssq += norm_sq(v);
    }
    out.seminorm_sq = h * ssq;
    return out;
}

inline double loop_min_radius(const SymmetricLoop& loop) {
    double min_r2 = -1.0;
    for (std::size_t j = 0; j <= loop.half_count; ++j) {
        const double r2 = norm_sq(loop.node(j));
        if (min_r2 < 0.0 || r2 < min_r2) min_r2 = r2;
    }
    return std::sqrt(min_r2);
}

/// Linear interpolation onto a new half grid; optionally rescale radially so
/// the pin radius becomes new_radius (direction preserved).
inline SymmetricLoop resample(const SymmetricLoop& loop, std::size_t new_half_count,
                              std::optional<double> new_radius = std::nullopt) {
    if (new_half_count < 8) throw validation_error("half-grid count must be at least 8");
    const int dim = loop.dim;

    SymmetricLoop out;
    out.dim = dim;
    out.radius = loop.radius;
    out.direction = loop.direction;
    out.half_count = new_half_count;
    out.nodes.resize((new_half_count + 1) * dim);

    const double ratio = double(loop.half_count) / double(new_half_count);
    for (std::size_t j = 0; j <= new_half_count; ++j) {
        const double s = double(j) * ratio;  // position in old node units
        const auto lo = std::size_t(std::floor(s));
        const double frac = s - double(lo);
        auto q = out.node(j);
        const auto a = loop.node(std::min(lo, loop.half_count));
        if (frac == 0.0) {
            for (int c = 0; c < dim; ++c) q[c] = a[c];
        } else {
            const auto b = loop.node(std::min(lo + 1, loop.half_count));
            for (int c = 0; c < dim; ++c) q[c] = (1.0 - frac) * a[c] + frac * b[c];
        }
    }
    if (new_radius) {
        if (!(*new_radius > 0.0)) throw validation_error("new radius must be positive");
        const double scale = *new_radius / loop.radius;
        for (auto& x : out.nodes) x *= scale;
        out.radius = *new_radius;
    }
    detail::pin_endpoints(out);
    return out;
}

}  // namespace hyporb
