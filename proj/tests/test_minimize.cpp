#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "hyporb/minimize.hpp"

using namespace hyporb;

namespace {

SymmetricLoop circle(double radius, std::size_t m) {
    const std::vector<double> xi{1.0, 0.0}, eta{0.0, 1.0};
    return build_circular(radius, xi, eta, m);
}

MinimizeOptions guarded(double guard) {
    MinimizeOptions opt;
    opt.guard_radius = guard;
    return opt;
}

}  // namespace

TEST_CASE("minimization from a circular start") {
    const auto p = make_power_law(3.0, 2);
    const auto start = circle(1.0, 64);
    const auto res = minimize_loop(p, start, 1.0, guarded(0.4));

    CHECK(res.stats.outcome == MinimizeOutcome::converged);
    CHECK(res.stats.final_value <= 4.0 * M_PI * M_PI);  // beats the circle
    CHECK(res.stats.final_value <= res.stats.initial_value);
    CHECK(res.stats.final_grad_norm <=
          1e-8 * std::max(1.0, res.stats.final_value));
    CHECK(res.stats.min_radius_seen > 0.4);

    // Positivity via coercivity at the minimizer.
    const auto eval = evaluate_action(p, res.loop, 1.0);
    CHECK(eval.value >= 0.5 * eval.seminorm_sq);
    CHECK(eval.value > 0.0);

    // Descent: accepted values never increase.
    for (std::size_t i = 1; i < res.stats.value_history.size(); ++i)
        REQUIRE(res.stats.value_history[i] <= res.stats.value_history[i - 1]);

    // Symmetry survives: pins are untouched bitwise.
    CHECK(res.loop.node(0)[0] == start.node(0)[0]);
    CHECK(res.loop.node(0)[1] == start.node(0)[1]);
    CHECK(res.loop.node(64)[0] == start.node(64)[0]);
    CHECK(res.loop.node(64)[1] == start.node(64)[1]);
}

TEST_CASE("upper bound at R = 4 from the circular comparison loop") {
    const auto p = make_power_law(3.0, 2);
    const auto res = minimize_loop(p, circle(4.0, 128), 1.0, guarded(0.4));
    // f(Q) = 2 pi^2 R^2 (H + R^-3) for the circle of radius 4.
    const double circle_bound = 2.0 * M_PI * M_PI * 16.0 * (1.0 + 1.0 / 64.0);
    CHECK(res.stats.final_value <= circle_bound);
}

TEST_CASE("determinism: identical inputs give bit-identical results") {
    const auto p = make_power_law(3.0, 2);
    const auto start = circle(2.0, 48);
    MinimizeOptions opt = guarded(0.4);
    opt.seed = 7;
    const auto a = minimize_loop(p, start, 1.0, opt);
    const auto b = minimize_loop(p, start, 1.0, opt);
    REQUIRE(a.loop.nodes == b.loop.nodes);
    REQUIRE(a.stats.value_history == b.stats.value_history);
    REQUIRE(a.stats.iterations == b.stats.iterations);
}

TEST_CASE("critical circular start gets the seeded perturbation") {
    const auto p = make_power_law(3.0, 2);
    const double rc = std::pow(2.0, -1.0 / 3.0);  // zero radial pairing at H = 1
    const auto start = circle(rc, 64);
    CHECK(std::abs(radial_pairing(p, start, 1.0)) < 1e-9);

    const auto res = minimize_loop(p, start, 1.0, guarded(0.3));
    CHECK(res.stats.perturbed_start);
    CHECK(res.stats.outcome == MinimizeOutcome::converged);
    CHECK(res.stats.final_value <= res.stats.initial_value);
    // The critical circle is a genuine critical point; the perturbed start
    // settles back to (numerically) the same action value.
    CHECK(std::abs(res.stats.final_value - action_value(p, start, 1.0)) < 1e-4);

    // A non-critical circle must not be perturbed.
    const auto plain = minimize_loop(p, circle(1.0, 64), 1.0, guarded(0.4));
    CHECK_FALSE(plain.stats.perturbed_start);
}

TEST_CASE("iteration cap raises nonconvergence carrying the best iterate") {
    const auto p = make_power_law(3.0, 2);
    MinimizeOptions opt = guarded(0.4);
    opt.max_iterations = 3;
    try {
        minimize_loop(p, circle(4.0, 64), 1.0, opt);
        FAIL("expected nonconvergence");
    } catch (const nonconvergence_error& ex) {
        CHECK(ex.stats.outcome == MinimizeOutcome::iteration_cap);
        CHECK(ex.stats.iterations == 3);
        CHECK(ex.stats.final_value <= ex.stats.initial_value);
        CHECK(loop_min_radius(ex.best) > 0.4);
    }
}

TEST_CASE("guard blocks a start squeezed onto it") {
    const auto p = make_power_law(3.0, 2);
    // Interior nodes shrunk to sit a hair above the guard; the action still
    // pulls inward, so shrinking the step never finds admissible progress.
    auto start = circle(1.0, 16);
    const double guard = 0.9;
    for (std::size_t j = 1; j < start.half_count; ++j) {
        auto q = start.node(j);
        const double r = norm(q);
        const double target = guard * (1.0 + 1e-13);
        for (int c = 0; c < 2; ++c) q[c] *= target / r;
    }
    MinimizeOptions opt = guarded(guard);
    CHECK_THROWS_AS(minimize_loop(p, start, 1.0, opt), collision_trap_error);
}

TEST_CASE("guard proximity warning when the minimizer hugs the guard") {
    const auto p = make_power_law(3.0, 2);
    // The R = 1 minimizer dips to about 0.856; a guard at 0.8 is within 10%.
    const auto res = minimize_loop(p, circle(1.0, 64), 1.0, guarded(0.8));
    CHECK(res.stats.outcome == MinimizeOutcome::converged);
    CHECK(res.stats.guard_proximity_warning);

    const auto loose = minimize_loop(p, circle(1.0, 64), 1.0, guarded(0.4));
    CHECK_FALSE(loose.stats.guard_proximity_warning);
}

TEST_CASE("option validation") {
    const auto p = make_power_law(3.0, 2);
    const auto start = circle(1.0, 16);
    MinimizeOptions opt;  // guard unset
    CHECK_THROWS_AS(minimize_loop(p, start, 1.0, opt), validation_error);
    opt.guard_radius = 2.0;  // above the boundary radius
    CHECK_THROWS_AS(minimize_loop(p, start, 1.0, opt), validation_error);
    opt.guard_radius = 0.4;
    opt.backtrack = 1.5;
    CHECK_THROWS_AS(minimize_loop(p, start, 1.0, opt), validation_error);
}
