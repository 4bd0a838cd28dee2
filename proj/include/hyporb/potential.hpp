#pragma once

// Singular potential families for  u'' + grad V(u) = 0  at fixed energy H > 0:
// evaluation of V and grad V, the virial defect 2V + (x, grad V), sampled
// admissibility checks (V1)-(V7), the Gordon strong-force barrier constant,
// and the virial threshold radii that bound orbit radii from inside/outside.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hyporb/errors.hpp"
#include "hyporb/vec.hpp"

namespace hyporb {

enum class PotentialFamily { power_law, log_blend, kepler_test };

inline const char* family_name(PotentialFamily f) {
    switch (f) {
        case PotentialFamily::power_law: return "power-law";
        case PotentialFamily::log_blend: return "log-blend";
        case PotentialFamily::kepler_test: return "kepler-test";
    }
    return "?";
}

/// Far-field decay metadata: |x|^(beta+1) |grad V| <= m0 and |x|^(beta+1) |V| <= m0
/// for |x| >= r0, with beta > 1, r0 >= 1.
struct DecayBound {
    double beta = 2.0;
    double m0 = 3.0;
    double r0 = 1.0;
};

struct Potential {
    PotentialFamily family = PotentialFamily::power_law;
    double alpha = 3.0;  // power-law exponent; unused by the other families
    int dim = 2;
    std::optional<DecayBound> decay;
};

/// power_law with its canonical decay metadata (beta = alpha-1, m0 = alpha, r0 = 1).
inline Potential make_power_law(double alpha, int dim) {
    if (!(alpha > 0.0)) throw validation_error("power-law exponent must be positive");
    if (dim < 2) throw validation_error("dimension must be at least 2");
    Potential p;
    p.family = PotentialFamily::power_law;
    p.alpha = alpha;
    p.dim = dim;
    if (alpha > 1.0) p.decay = DecayBound{alpha - 1.0, alpha, 1.0};
    return p;
}

inline Potential make_log_blend(int dim) {
    if (dim < 2) throw validation_error("dimension must be at least 2");
    Potential p;
    p.family = PotentialFamily::log_blend;
    p.alpha = 3.0;  // outer tail exponent
    p.dim = dim;
    p.decay = DecayBound{2.0, 3.0, 2.0};
    return p;
}

/// alpha = 1 Kepler potential; fails (V4) and is kept only as an integrator oracle.
inline Potential make_kepler_test(int dim) {
    if (dim < 2) throw validation_error("dimension must be at least 2");
    Potential p;
    p.family = PotentialFamily::kepler_test;
    p.alpha = 1.0;
    p.dim = dim;
    p.decay = std::nullopt;  // (V7) needs beta > 1, which alpha = 1 cannot give
    return p;
}

namespace detail {

struct RadialSample {
    double value;   // v(r)
    double dvalue;  // v'(r)
};

// Hermite data blending -ln(r^2 + r^-2)/r^2 (r <= 1) into -r^-3 (r >= 2).
// Endpoint values/slopes: v(1) = -ln 2, v'(1) = 2 ln 2, v(2) = -1/8, v'(2) = 3/16.
inline RadialSample log_blend_middle(double r) {
    const double p0 = -std::log(2.0);
    const double m0 = 2.0 * std::log(2.0);
    const double p1 = -0.125;
    const double m1 = 0.1875;
    const double s = r - 1.0;  // interval [1,2] has unit width
    const double s2 = s * s;
    const double s3 = s2 * s;
    RadialSample out;
    out.value = (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * m0 +
                (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * m1;
    out.dvalue = (6.0 * s2 - 6.0 * s) * p0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 +
                 (-6.0 * s2 + 6.0 * s) * p1 + (3.0 * s2 - 2.0 * s) * m1;
    return out;
}

inline RadialSample radial_eval(const Potential& p, double r) {
    if (!(r > 0.0)) throw singularity_error("potential evaluated at the origin");
    switch (p.family) {
        case PotentialFamily::power_law: {
            const double q = std::pow(r, -p.alpha);  // r^-alpha
            return {-q, p.alpha * q / r};
        }
        case PotentialFamily::kepler_test:
            return {-1.0 / r, 1.0 / (r * r)};
        case PotentialFamily::log_blend: {
            if (r <= 1.0) {
                const double r2 = r * r;
                const double g = std::log(r2 + 1.0 / r2);
                const double dg = (2.0 * r - 2.0 / (r2 * r)) / (r2 + 1.0 / r2);
                return {-g / r2, -dg / r2 + 2.0 * g / (r2 * r)};
            }
            if (r >= 2.0) {
                const double q = 1.0 / (r * r * r);
                return {-q, 3.0 * q / r};
            }
            return log_blend_middle(r);
        }
    }
    throw validation_error("unknown potential family");
}

}  // namespace detail

struct PotentialSample {
    double value;
    std::vector<double> gradient;
};

/// V(x) and grad V(x). All built-in families are radial: grad V = v'(r) x / r.
inline PotentialSample evaluate(const Potential& p, std::span<const double> x) {
    const double r = norm(x);
    const auto s = detail::radial_eval(p, r);
    PotentialSample out;
    out.value = s.value;
    out.gradient.resize(x.size());
    const double c = s.dvalue / r;
    for (std::size_t i = 0; i < x.size(); ++i) out.gradient[i] = c * x[i];
    return out;
}

inline double potential_value(const Potential& p, std::span<const double> x) {
    return detail::radial_eval(p, norm(x)).value;
}

/// 2 V(x) + (x, grad V(x)); for radial potentials this is 2 v(r) + r v'(r).
inline double virial_defect(const Potential& p, std::span<const double> x) {
    const double r = norm(x);
    const auto s = detail::radial_eval(p, r);
    return 2.0 * s.value + r * s.dvalue;
}

inline double virial_defect_radial(const Potential& p, double r) {
    const auto s = detail::radial_eval(p, r);
    return 2.0 * s.value + r * s.dvalue;
}

// ---------------------------------------------------------------------------
// Hypothesis checks (sampled; a pass means "no counterexample found")
// ---------------------------------------------------------------------------

struct HypothesisOptions {
    double r_min = 1e-3;
    double r_max = 1e3;
    std::size_t radial_samples = 400;
    std::size_t direction_samples = 8;
    double v3_tol = 1e-3;    // |defect| at the far end
    double v4_floor = 1e2;   // defect at the inner end
    double v5_floor = 1e2;   // -V at the inner end
    double v6_tol = 1e-3;    // |V| at the far end
    unsigned seed = 2027;    // direction sampling in dim > 2
};

struct HypothesisCheck {
    std::string id;
    bool applicable = true;
    bool passed = false;
    double witness_value = 0.0;
    double witness_radius = 0.0;
    std::string note;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;

    const HypothesisCheck& check(const std::string& id) const {
        for (const auto& c : checks)
            if (c.id == id) return c;
        throw validation_error("no such hypothesis: " + id);
    }

    /// (V1)-(V6) are required for the variational machinery; (V7) only gates
    /// the asymptotic-direction analysis.
    bool required_passed() const {
        for (const auto& c : checks)
            if (c.id != "V7" && !c.passed) return false;
        return true;
    }
};

namespace detail {

inline std::vector<std::vector<double>> direction_set(int dim, std::size_t count, unsigned seed) {
    std::vector<std::vector<double>> dirs;
    dirs.reserve(count);
    if (dim == 2) {
        for (std::size_t k = 0; k < count; ++k) {
            const double a = 2.0 * M_PI * double(k) / double(count);
            dirs.push_back({std::cos(a), std::sin(a)});
        }
        return dirs;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> axis(dim, 0.0);
    axis[0] = 1.0;
    dirs.push_back(axis);
    while (dirs.size() < count) {
        std::vector<double> v(dim);
        for (auto& c : v) c = gauss(rng);
        if (norm(v) < 1e-8) continue;
        normalize(v);
        dirs.push_back(std::move(v));
    }
    return dirs;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> r(n);
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = std::exp(llo + (lhi - llo) * double(i) / double(n - 1));
    r.front() = lo;
    r.back() = hi;
    return r;
}

inline std::string radius_note(const char* what, double value, double radius) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s = %.6g at r = %.6g", what, value, radius);
    return buf;
}

}  // namespace detail

inline HypothesisReport check_hypotheses(const Potential& p, const HypothesisOptions& opt = {}) {
    if (opt.r_min > 1e-3 || opt.r_max < 1e3)
        throw validation_error("hypothesis radius grid must span at least [1e-3, 1e3]");
    if (opt.radial_samples < 16) throw validation_error("need at least 16 radial samples");

    const auto radii = detail::log_grid(opt.r_min, opt.r_max, opt.radial_samples);
    const auto dirs = detail::direction_set(p.dim, opt.direction_samples, opt.seed);

    // Per-radius extremes over directions (all built-ins are radial, but the
    // check does not assume that).
    const std::size_t n = radii.size();
    std::vector<double> vmin(n), vmax(n), dmin(n), dmax(n);
    bool v1_exact = true;
    double v1_worst = 0.0, v1_radius = 0.0;
    std::vector<double> x(p.dim), mx(p.dim);
    for (std::size_t i = 0; i < n; ++i) {
        double vlo = 0.0, vhi = 0.0, dlo = 0.0, dhi = 0.0;
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            for (int c = 0; c < p.dim; ++c) {
                x[c] = radii[i] * dirs[k][c];
                mx[c] = -x[c];
            }
            const double v = potential_value(p, x);
            const double d = virial_defect(p, x);
            const double vrefl = potential_value(p, mx);
            if (vrefl != v) {
                v1_exact = false;
                if (std::abs(vrefl - v) > v1_worst) {
                    v1_worst = std::abs(vrefl - v);
                    v1_radius = radii[i];
                }
            }
            if (k == 0) {
                vlo = vhi = v;
                dlo = dhi = d;
            } else {
                vlo = std::min(vlo, v);
                vhi = std::max(vhi, v);
                dlo = std::min(dlo, d);
                dhi = std::max(dhi, d);
            }
        }
        vmin[i] = vlo;
        vmax[i] = vhi;
        dmin[i] = dlo;
        dmax[i] = dhi;
    }

    HypothesisReport rep;

    {
        HypothesisCheck c;
        c.id = "V1";
        c.passed = v1_exact;
        c.witness_value = v1_worst;
        c.witness_radius = v1_radius;
        c.note = v1_exact ? "V(-x) = V(x) exactly at all samples"
                          : detail::radius_note("max |V(-x) - V(x)|", v1_worst, v1_radius);
        rep.checks.push_back(c);
    }
    {
        HypothesisCheck c;
        c.id = "V2";
        double worst = vmax[0];
        double at = radii[0];
        for (std::size_t i = 0; i < n; ++i)
            if (vmax[i] > worst) { worst = vmax[i]; at = radii[i]; }
        c.passed = worst < 0.0;
        c.witness_value = worst;
        c.witness_radius = at;
        c.note = detail::radius_note("max V", worst, at);
        rep.checks.push_back(c);
    }

    // Index ranges: "head" = first decade above r_min, "tail" = last decade.
    std::size_t head_end = 0;
    while (head_end + 1 < n && radii[head_end + 1] <= 10.0 * opt.r_min) ++head_end;
    std::size_t tail_begin = n - 1;
    while (tail_begin > 0 && radii[tail_begin - 1] >= opt.r_max / 10.0) --tail_begin;

    {
        HypothesisCheck c;
        c.id = "V3";  // defect -> 0 as r -> infinity
        const std::size_t mid = (tail_begin + n) / 2;
        double first_half = 0.0, second_half = 0.0;
        for (std::size_t i = tail_begin; i < n; ++i) {
            const double m = std::max(std::abs(dmin[i]), std::abs(dmax[i]));
            (i < mid ? first_half : second_half) = std::max(i < mid ? first_half : second_half, m);
        }
        const double edge = std::max(std::abs(dmin[n - 1]), std::abs(dmax[n - 1]));
        c.passed = edge <= opt.v3_tol && second_half <= first_half + 1e-12;
        c.witness_value = edge;
        c.witness_radius = radii[n - 1];
        c.note = detail::radius_note("|defect| at the far end", edge, radii[n - 1]);
        rep.checks.push_back(c);
    }
    {
        HypothesisCheck c;
        c.id = "V4";  // defect -> +inf as r -> 0
        double worst = dmin[0];
        double at = radii[0];
        for (std::size_t i = 0; i <= head_end; ++i)
            if (dmin[i] < worst) { worst = dmin[i]; at = radii[i]; }
        c.passed = worst >= opt.v4_floor && dmin[0] >= dmin[head_end] - 1e-12;
        c.witness_value = worst;
        c.witness_radius = at;
        c.note = detail::radius_note("min defect on inner decade", worst, at);
        rep.checks.push_back(c);
    }
    {
        HypothesisCheck c;
        c.id = "V5";  // -V -> +inf as r -> 0
        double worst = -vmax[0];
        double at = radii[0];
        for (std::size_t i = 0; i <= head_end; ++i)
            if (-vmax[i] < worst) { worst = -vmax[i]; at = radii[i]; }
        c.passed = worst >= opt.v5_floor && -vmax[0] >= -vmax[head_end] - 1e-12;
        c.witness_value = worst;
        c.witness_radius = at;
        c.note = detail::radius_note("min -V on inner decade", worst, at);
        rep.checks.push_back(c);
    }
    {
        HypothesisCheck c;
        c.id = "V6";  // V -> 0 as r -> infinity
        const std::size_t mid = (tail_begin + n) / 2;
        double first_half = 0.0, second_half = 0.0;
        for (std::size_t i = tail_begin; i < n; ++i) {
            const double m = std::max(std::abs(vmin[i]), std::abs(vmax[i]));
            (i < mid ? first_half : second_half) = std::max(i < mid ? first_half : second_half, m);
        }
        const double edge = std::max(std::abs(vmin[n - 1]), std::abs(vmax[n - 1]));
        c.passed = edge <= opt.v6_tol && second_half <= first_half + 1e-12;
        c.witness_value = edge;
        c.witness_radius = radii[n - 1];
        c.note = detail::radius_note("|V| at the far end", edge, radii[n - 1]);
        rep.checks.push_back(c);
    }
    {
        HypothesisCheck c;
        c.id = "V7";
        if (!p.decay) {
            c.applicable = false;
            c.passed = false;
            c.note = "no (beta, M0, r0) metadata";
        } else {
            const auto& d = *p.decay;
            double worst = 0.0;
            double at = d.r0;
            std::vector<double> y(p.dim);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = (i == 0) ? d.r0 : radii[i];  // include r0 itself
                if (r < d.r0) continue;
                const double w = std::pow(r, d.beta + 1.0);
                for (std::size_t k = 0; k < dirs.size(); ++k) {
                    for (int cix = 0; cix < p.dim; ++cix) y[cix] = r * dirs[k][cix];
                    const auto s = evaluate(p, y);
                    const double m = w * std::max(norm(s.gradient), std::abs(s.value));
                    if (m > worst) { worst = m; at = r; }
                }
            }
            c.passed = worst <= d.m0 * (1.0 + 1e-12);
            c.witness_value = worst;
            c.witness_radius = at;
            c.note = detail::radius_note("max r^(beta+1) (|grad V| or |V|)", worst, at);
        }
        rep.checks.push_back(c);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Strong-force barrier (Gordon):  -V(x) >= C / |x|^2 on (0, delta]
// ---------------------------------------------------------------------------

struct StrongForceResult {
    double constant = 0.0;    // C = delta^2 * min_{|x|=delta} (-V)
    double min_slack = 0.0;   // min over samples of (-V - C/r^2) / (C/r^2)
    std::size_t samples = 0;
};

inline StrongForceResult strong_force_constant(const Potential& p, double delta,
                                               std::size_t radial_samples = 256,
                                               std::size_t direction_samples = 8,
                                               unsigned seed = 2027) {
    if (!(delta > 0.0)) throw validation_error("delta must be positive");
    const auto dirs = detail::direction_set(p.dim, direction_samples, seed);
    const auto radii = detail::log_grid(delta * 1e-6, delta, radial_samples);

    std::vector<double> x(p.dim);
    // The barrier derivation needs phi(r) = -V r^2 nonincreasing on (0, delta],
    // i.e. virial defect >= 0 there. The defect is a difference of large terms
    // near the origin, so the tolerance is relative to its cancellation scale.
    for (double r : radii) {
        for (const auto& d : dirs) {
            for (int c = 0; c < p.dim; ++c) x[c] = r * d[c];
            const auto s = detail::radial_eval(p, norm(x));
            const double defect = 2.0 * s.value + r * s.dvalue;
            const double scale = std::abs(2.0 * s.value) + std::abs(r * s.dvalue);
            if (defect < -1e-9 * scale) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "virial defect %.6g < 0 at r = %.6g; delta too large",
                              defect, r);
                throw inadmissible_delta_error(buf);
            }
        }
    }

    double min_neg_v = 0.0;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        for (int c = 0; c < p.dim; ++c) x[c] = delta * dirs[k][c];
        const double nv = -potential_value(p, x);
        min_neg_v = (k == 0) ? nv : std::min(min_neg_v, nv);
    }
    StrongForceResult out;
    out.constant = delta * delta * min_neg_v;

    double min_slack = 0.0;
    bool first = true;
    for (double r : radii) {
        const double barrier = out.constant / (r * r);
        for (const auto& d : dirs) {
            for (int c = 0; c < p.dim; ++c) x[c] = r * d[c];
            const double nv = -potential_value(p, x);
            const double slack = (nv - barrier) / barrier;
            if (slack < -1e-12) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "-V = %.6g below barrier %.6g at r = %.6g", nv, barrier, r);
                throw inadmissible_delta_error(buf);
            }
            if (first || slack < min_slack) { min_slack = slack; first = false; }
            ++out.samples;
        }
    }
    out.min_slack = min_slack;
    return out;
}

// ---------------------------------------------------------------------------
// Virial threshold radii: defect > 2H inside m_inner, defect < 2H outside M_outer
// ---------------------------------------------------------------------------

struct RadiusBounds {
    double m_inner = 0.0;
    double M_outer = 0.0;
};

inline RadiusBounds virial_threshold_radii(const Potential& p, double energy,
                                           double scan_lo = 1e-4, double scan_hi = 1e4,
                                           std::size_t scan_samples = 2048) {
    if (!(energy > 0.0)) throw validation_error("energy must be positive");
    const double target = 2.0 * energy;
    const auto dirs = detail::direction_set(p.dim, 8, 2027);
    const auto radii = detail::log_grid(scan_lo, scan_hi, scan_samples);

    std::vector<double> x(p.dim);
    auto defect_min = [&](double r) {
        double lo = 0.0;
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            for (int c = 0; c < p.dim; ++c) x[c] = r * dirs[k][c];
            const double d = virial_defect(p, x);
            lo = (k == 0) ? d : std::min(lo, d);
        }
        return lo;
    };
    auto defect_max = [&](double r) {
        double hi = 0.0;
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            for (int c = 0; c < p.dim; ++c) x[c] = r * dirs[k][c];
            const double d = virial_defect(p, x);
            hi = (k == 0) ? d : std::max(hi, d);
        }
        return hi;
    };

    const std::size_t n = radii.size();
    // m_inner: first grid index where min-over-directions defect fails > 2H.
    std::size_t i = 0;
    while (i < n && defect_min(radii[i]) > target) ++i;
    if (i == 0)
        throw inconclusive_error("virial defect never exceeds 2H on the scan grid");
    if (i == n)
        throw inconclusive_error("virial defect exceeds 2H at the largest scanned radius");
    double lo = radii[i - 1], hi = radii[i];
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (defect_min(mid) > target) lo = mid; else hi = mid;
    }
    RadiusBounds out;
    out.m_inner = 0.5 * (lo + hi);

    // M_outer: last grid index where max-over-directions defect is still >= 2H.
    std::size_t j = n;
    for (std::size_t k = n; k-- > 0;) {
        if (defect_max(radii[k]) >= target) { j = k; break; }
    }
    if (j == n || j + 1 >= n)
        throw inconclusive_error("could not bracket the outer virial threshold");
    lo = radii[j];
    hi = radii[j + 1];
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (defect_max(mid) >= target) lo = mid; else hi = mid;
    }
    out.M_outer = 0.5 * (lo + hi);
    if (out.m_inner > out.M_outer * (1.0 + 1e-9))
        throw inconclusive_error("inner threshold exceeds outer threshold");
    return out;
}

}  // namespace hyporb
