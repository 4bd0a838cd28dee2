#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hyporb/errors.hpp"

namespace hyporb {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline void normalize(std::span<double> a) {
    const double n = norm(a);
    if (n == 0.0) throw validation_error("cannot normalize a zero vector");
    for (auto& x : a) x /= n;
}

inline std::vector<double> unit(std::span<const double> a) {
    std::vector<double> out(a.begin(), a.end());
    normalize(out);
    return out;
}

// Row views into a flat row-major (count x dim) array.
inline std::span<const double> row(const std::vector<double>& data, std::size_t i, std::size_t dim) {
    return {data.data() + i * dim, dim};
}

inline std::span<double> row(std::vector<double>& data, std::size_t i, std::size_t dim) {
    return {data.data() + i * dim, dim};
}

/// Deterministic unit vector orthogonal to e: take the coordinate axis least
/// aligned with e and Gram-Schmidt it against e.
inline std::vector<double> orthogonal_unit(std::span<const double> e) {
    const std::size_t n = e.size();
    if (n < 2) throw validation_error("orthogonal_unit needs dimension >= 2");
    std::size_t axis = 0;
    double best = std::abs(e[0]);
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(e[i]) < best) {
            best = std::abs(e[i]);
            axis = i;
        }
    }
    std::vector<double> v(n, 0.0);
    v[axis] = 1.0;
    const double proj = dot(v, e) / norm_sq(e);
    for (std::size_t i = 0; i < n; ++i) v[i] -= proj * e[i];
    normalize(v);
    return v;
}

}  // namespace hyporb
