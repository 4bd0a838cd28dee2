#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hyporb/potential.hpp"

using namespace hyporb;

namespace {

// Independent oracle: central finite differences of V.
std::vector<double> fd_gradient(const Potential& p, std::span<const double> x,
                                double rel = 1e-7) {
    std::vector<double> g(x.size());
    std::vector<double> y(x.begin(), x.end());
    for (std::size_t c = 0; c < x.size(); ++c) {
        const double h = rel * std::max(1.0, std::abs(x[c]));
        y[c] = x[c] + h;
        const double vp = potential_value(p, y);
        y[c] = x[c] - h;
        const double vm = potential_value(p, y);
        y[c] = x[c];
        g[c] = (vp - vm) / (2.0 * h);
    }
    return g;
}

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

TEST_CASE("power-law value and gradient at hand-checked points") {
    const auto p = make_power_law(3.0, 2);

    const std::vector<double> x1{1.0, 0.0};
    auto s1 = evaluate(p, x1);
    CHECK(s1.value == Catch::Approx(-1.0).margin(1e-15));
    CHECK(s1.gradient[0] == Catch::Approx(3.0).margin(1e-14));
    CHECK(s1.gradient[1] == Catch::Approx(0.0).margin(1e-15));

    // grad(-r^-3) = 3 x / r^5; at x = (2, 0) the x-component is 3*2/32 = 0.1875.
    const std::vector<double> x2{2.0, 0.0};
    auto s2 = evaluate(p, x2);
    CHECK(s2.value == Catch::Approx(-0.125).margin(1e-15));
    CHECK(s2.gradient[0] == Catch::Approx(0.1875).margin(1e-15));
    const auto fd2 = fd_gradient(p, x2);
    CHECK(std::abs(s2.gradient[0] - fd2[0]) < 1e-6);

    const auto kp = make_kepler_test(2);
    const std::vector<double> x3{0.0, 1.0};
    auto s3 = evaluate(kp, x3);
    CHECK(s3.value == Catch::Approx(-1.0).margin(1e-15));
    CHECK(s3.gradient[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(s3.gradient[1] == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("gradient matches finite differences across families") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> logr(std::log(0.1), std::log(100.0));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    const Potential families[] = {make_power_law(2.5, 2), make_power_law(3.0, 2),
                                  make_power_law(4.0, 2), make_log_blend(2),
                                  make_kepler_test(2)};
    for (const auto& p : families) {
        for (int trial = 0; trial < 40; ++trial) {
            const double r = std::exp(logr(rng));
            const double a = angle(rng);
            const std::vector<double> x{r * std::cos(a), r * std::sin(a)};
            const auto s = evaluate(p, x);
            const auto fd = fd_gradient(p, x);
            const double scale = std::max(1.0, norm(s.gradient));
            for (int c = 0; c < 2; ++c)
                REQUIRE(std::abs(s.gradient[c] - fd[c]) / scale < 1e-6);
        }
    }
}

TEST_CASE("evaluation at the origin is rejected") {
    const auto p = make_power_law(3.0, 2);
    const std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS_AS(evaluate(p, zero), singularity_error);
    CHECK_THROWS_AS(virial_defect(p, zero), singularity_error);
}

TEST_CASE("virial defect identities") {
    const auto p3 = make_power_law(3.0, 2);
    const std::vector<double> e1{1.0, 0.0};
    CHECK(virial_defect(p3, e1) == Catch::Approx(1.0).margin(1e-14));

    const std::vector<double> x2{0.0, 2.0};
    CHECK(virial_defect(p3, x2) == Catch::Approx(0.125).margin(1e-14));

    const auto p2 = make_power_law(2.0, 2);
    const std::vector<double> x{0.3, -0.7};
    CHECK(std::abs(virial_defect(p2, x)) < 1e-13);

    // Power-law identity: defect * r^alpha = alpha - 2 to 1e-12 relative.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> logr(std::log(1e-2), std::log(1e2));
    for (double alpha : {2.5, 3.0, 4.0}) {
        const auto p = make_power_law(alpha, 2);
        for (int trial = 0; trial < 50; ++trial) {
            const double r = std::exp(logr(rng));
            const std::vector<double> y{r, 0.0};
            const double lhs = virial_defect(p, y) * std::pow(r, alpha);
            REQUIRE(std::abs(lhs - (alpha - 2.0)) < 1e-12 * std::max(1.0, alpha - 2.0));
        }
    }
}

TEST_CASE("power-law defect is strictly decreasing in radius for alpha > 2") {
    const auto p = make_power_law(3.0, 2);
    double prev = virial_defect_radial(p, 0.05);
    for (double r = 0.1; r < 50.0; r *= 1.3) {
        const double d = virial_defect_radial(p, r);
        REQUIRE(d < prev);
        prev = d;
    }
}

TEST_CASE("built-in families are even and negative") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    const Potential families[] = {make_power_law(3.0, 3), make_log_blend(3),
                                  make_kepler_test(3)};
    for (const auto& p : families) {
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> x{coord(rng), coord(rng), coord(rng)};
            if (norm(x) < 1e-3) continue;
            std::vector<double> mx{-x[0], -x[1], -x[2]};
            REQUIRE(potential_value(p, x) < 0.0);
            REQUIRE(potential_value(p, mx) == potential_value(p, x));
        }
    }
}

TEST_CASE("log-blend is C1 at the seam radii") {
    const auto p = make_log_blend(2);
    for (double r : {1.0, 2.0}) {
        const std::vector<double> inside{r - 1e-7, 0.0};
        const std::vector<double> outside{r + 1e-7, 0.0};
        const auto a = evaluate(p, inside);
        const auto b = evaluate(p, outside);
        CHECK(std::abs(a.value - b.value) < 1e-6);
        CHECK(std::abs(a.gradient[0] - b.gradient[0]) < 1e-5);
    }
    CHECK(potential_value(p, std::vector<double>{1.0, 0.0}) ==
          Catch::Approx(-std::log(2.0)).margin(1e-15));
    CHECK(potential_value(p, std::vector<double>{2.0, 0.0}) ==
          Catch::Approx(-0.125).margin(1e-15));
}

TEST_CASE("hypothesis checks: admissible families pass, kepler fails V4") {
    const auto rep3 = check_hypotheses(make_power_law(3.0, 2));
    for (const char* id : {"V1", "V2", "V3", "V4", "V5", "V6"})
        CHECK(rep3.check(id).passed);
    CHECK(rep3.check("V7").applicable);
    CHECK(rep3.check("V7").passed);  // beta = 2, M0 = 3, r0 = 1
    CHECK(rep3.required_passed());

    const auto repb = check_hypotheses(make_log_blend(2));
    CHECK(repb.required_passed());
    CHECK(repb.check("V7").passed);

    const auto repk = check_hypotheses(make_kepler_test(2));
    CHECK_FALSE(repk.check("V4").passed);
    CHECK(repk.check("V1").passed);
    CHECK(repk.check("V2").passed);
    CHECK(repk.check("V3").passed);
    CHECK(repk.check("V5").passed);
    CHECK(repk.check("V6").passed);
    CHECK_FALSE(repk.required_passed());
    CHECK_FALSE(repk.check("V7").applicable);
}

TEST_CASE("hypothesis grid must span the required decades") {
    HypothesisOptions opt;
    opt.r_min = 1e-2;
    CHECK_THROWS_AS(check_hypotheses(make_power_law(3.0, 2), opt), validation_error);
}

TEST_CASE("strong-force constant") {
    const auto p3 = make_power_law(3.0, 2);
    auto r1 = strong_force_constant(p3, 1.0);
    CHECK(r1.constant == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(r1.min_slack >= -1e-12);

    auto r2 = strong_force_constant(p3, 0.5);
    CHECK(r2.constant == Catch::Approx(2.0).epsilon(1e-12));

    // Equality case: -V = 1/r^2 exactly gives C = 1 with zero slack.
    const auto p2 = make_power_law(2.0, 2);
    auto r3 = strong_force_constant(p2, 1.0);
    CHECK(r3.constant == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(r3.min_slack) < 1e-12);

    // Kepler's defect is negative, so no delta is admissible.
    CHECK_THROWS_AS(strong_force_constant(make_kepler_test(2), 1.0),
                    inadmissible_delta_error);
}

TEST_CASE("virial threshold radii") {
    // alpha = 3, H = 1: solve r^-3 = 2.
    auto b1 = virial_threshold_radii(make_power_law(3.0, 2), 1.0);
    const double expected = std::pow(2.0, -1.0 / 3.0);
    CHECK(rel_err(b1.m_inner, expected) < 1e-9);
    CHECK(rel_err(b1.M_outer, expected) < 1e-9);
    CHECK(b1.m_inner <= b1.M_outer * (1.0 + 1e-12));

    auto b2 = virial_threshold_radii(make_power_law(3.0, 2), 0.5);
    CHECK(rel_err(b2.m_inner, 1.0) < 1e-9);

    auto b3 = virial_threshold_radii(make_power_law(4.0, 2), 1.0);
    CHECK(rel_err(b3.m_inner, 1.0) < 1e-9);

    CHECK_THROWS_AS(virial_threshold_radii(make_kepler_test(2), 1.0), inconclusive_error);
}
