#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "hyporb/continuation.hpp"

using namespace hyporb;

namespace {

/// Synthetic orbit with radius profile r(t) = 3 - cos(2 pi t / T): boundary
/// radius 4 at +-T/2, minimum 2 at t = 0. Positions run along a fixed axis
/// with a sign flip so the radius is exactly |u|.
PeriodicOrbit synthetic_radial(std::size_t n, double period) {
    PeriodicOrbit orbit;
    orbit.dim = 2;
    orbit.period = period;
    orbit.energy = 1.0;
    orbit.boundary_radius = 4.0;
    orbit.t_start = -0.5 * period;
    orbit.dt = period / double(n);
    orbit.positions.resize(n * 2);
    orbit.velocities.assign(n * 2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = orbit.t_start + double(i) * orbit.dt;
        const double r = 3.0 - std::cos(2.0 * M_PI * t / period);
        orbit.positions[2 * i] = r;
        orbit.positions[2 * i + 1] = 0.0;
        orbit.velocities[2 * i] = 2.0 * M_PI / period * std::sin(2.0 * M_PI * t / period);
    }
    return orbit;
}

ContinuationConfig small_config() {
    ContinuationConfig cfg;
    cfg.potential = make_power_law(3.0, 2);
    cfg.energy = 1.0;
    cfg.schedule = {4.0, 8.0};
    cfg.grid = 128;
    cfg.window_tau = 1.0;
    return cfg;
}

}  // namespace

TEST_CASE("escape times on a synthetic radius profile") {
    const auto orbit = synthetic_radial(512, 8.0);

    // r <= 3 exactly for |t| <= T/4.
    const auto et = escape_times(orbit, 3.0);
    CHECK(std::abs(et.t_minus + 2.0) < 1e-3);
    CHECK(std::abs(et.t_plus - 2.0) < 1e-3);
    CHECK(et.t_minus >= -4.0);
    CHECK(et.t_plus <= 4.0);

    CHECK_THROWS_AS(escape_times(orbit, 4.0), validation_error);   // L >= R
    CHECK_THROWS_AS(escape_times(orbit, 1.5), no_passage_error);   // below min radius
}

TEST_CASE("recentering picks the earliest crossing") {
    const auto orbit = synthetic_radial(512, 8.0);

    // First time r = 2.5: cos(2 pi t / T) = 0.5 descending, t = -T/6.
    const auto rc = recenter(orbit, 2.5);
    CHECK(std::abs(rc.t_star + 8.0 / 6.0) < 1e-3);
    CHECK(std::abs(rc.orbit.radius_at(0.0) - 2.5) < 1e-3);

    // A level matched only at the minimum still recenters (tangential touch).
    const auto touch = recenter(orbit, 2.0 + 1e-9);
    CHECK(std::abs(touch.t_star) <= 0.5 * orbit.period);

    CHECK_THROWS_AS(recenter(orbit, 1.0), recenter_error);
    CHECK_THROWS_AS(recenter(orbit, 9.0), recenter_error);
}

TEST_CASE("window deltas") {
    const auto orbit = synthetic_radial(256, 8.0);
    CHECK(cloc_delta(orbit, orbit, 1.5) == 0.0);

    const auto same = time_translate(orbit, 0.0);
    CHECK(cloc_delta(orbit, same, 1.5) == 0.0);

    const auto shifted = time_translate(orbit, 0.5);
    CHECK(cloc_delta(orbit, shifted, 1.5) > 0.1);

    CHECK_THROWS_AS(cloc_delta(orbit, orbit, 5.0), invalid_window_error);
}

TEST_CASE("continuation over a short schedule") {
    const auto cfg = small_config();
    const auto res = run_continuation(cfg);

    REQUIRE(res.records.size() == 2);
    REQUIRE(res.orbits.size() == 2);
    REQUIRE(res.recentered.size() == 2);
    CHECK(res.thresholds.m_inner ==
          Catch::Approx(std::pow(2.0, -1.0 / 3.0)).epsilon(1e-6));
    CHECK(res.guard_radius == Catch::Approx(0.5 * res.thresholds.m_inner));
    CHECK(res.comparison_radius > res.thresholds.M_outer);
    CHECK(res.comparison_radius < 4.0);
    CHECK(res.recenter_level < res.comparison_radius);

    double prev_margin = 0.0;
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const auto& rec = res.records[i];
        // Collision-free with the Lemma 5.1 floor: minimizers stay above the
        // inner virial radius.
        CHECK(rec.min_radius > res.guard_radius);
        CHECK(rec.min_radius > res.thresholds.m_inner);
        CHECK(rec.max_radius == Catch::Approx(rec.boundary_radius).epsilon(1e-12));

        // Escape-time growth and the Lemma 5.2 inequality.
        const double margin = 0.5 * rec.period - rec.t_plus;
        CHECK(margin > prev_margin);
        prev_margin = margin;
        CHECK(rec.escape_lhs <= rec.escape_rhs);

        // Solution quality at this grid.
        CHECK(rec.energy_residual < 5e-3);
        CHECK(rec.virial_identity_residual < 0.1);
        CHECK(rec.lipschitz <= rec.speed_bound + 1e-3);

        // Recentered orbit passes the level at t = 0 within 2 dt M5.
        const auto& rc = res.recentered[i];
        CHECK(std::abs(rc.radius_at(0.0) - res.recenter_level) <=
              2.0 * rc.dt * rec.speed_bound);

        // t* sits inside the passage window.
        CHECK(rec.t_star >= rec.t_minus - 1e-9);
        CHECK(rec.t_star <= rec.t_plus + 1e-9);
    }
    CHECK(res.records[1].cloc_delta > 0.0);
    CHECK(std::isnan(res.records[0].cloc_delta));
    CHECK(res.m6 == Catch::Approx(res.records[1].comparison_action -
                                  2.0 * std::sqrt(cfg.energy) * 8.0)
                        .margin(1e-9)
                        .epsilon(0.5));

    // Action upper bound from the circular comparison loop at every R.
    for (const auto& rec : res.records) {
        const double circle_bound =
            2.0 * M_PI * M_PI * rec.boundary_radius * rec.boundary_radius *
            (cfg.energy + std::pow(rec.boundary_radius, -3.0));
        CHECK(rec.action <= circle_bound + 1e-6);
    }
}

TEST_CASE("warm starts do not lose ground against cold starts") {
    const auto cfg = small_config();
    const auto res = run_continuation(cfg);

    const std::vector<double> e{1.0, 0.0}, ep{0.0, 1.0};
    MinimizeOptions opt = cfg.minimize;
    opt.guard_radius = res.guard_radius;
    const auto cold = minimize_loop(cfg.potential, build_circular(8.0, e, ep, cfg.grid),
                                    cfg.energy, opt);
    CHECK(res.records[1].action <= cold.stats.final_value + 1e-6);
}

TEST_CASE("continuation is deterministic") {
    const auto cfg = small_config();
    const auto a = run_continuation(cfg);
    const auto b = run_continuation(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        REQUIRE(a.records[i].action == b.records[i].action);
        REQUIRE(a.records[i].t_star == b.records[i].t_star);
        REQUIRE(a.orbits[i].positions == b.orbits[i].positions);
    }
}

TEST_CASE("equicontinuity along recentered orbits") {
    const auto res = run_continuation(small_config());
    for (std::size_t k = 0; k < res.recentered.size(); ++k) {
        const auto& orbit = res.recentered[k];
        const double m5 = res.records[k].speed_bound;
        const std::size_t n = orbit.count();
        for (std::size_t i = 0; i < n; ++i) {
            const double chord =
                distance(orbit.position((i + 1) % n), orbit.position(i));
            REQUIRE(chord <= (m5 + 1e-3) * orbit.dt);
        }
    }
}

TEST_CASE("continuation validation and hypothesis gate") {
    auto cfg = small_config();
    cfg.potential = make_kepler_test(2);
    CHECK_THROWS_AS(run_continuation(cfg), hypothesis_error);

    cfg = small_config();
    cfg.schedule = {8.0, 4.0};
    CHECK_THROWS_AS(run_continuation(cfg), validation_error);

    cfg = small_config();
    cfg.comparison_radius = 5.0;  // above the smallest schedule entry
    CHECK_THROWS_AS(run_continuation(cfg), validation_error);

    cfg = small_config();
    cfg.energy = -1.0;
    CHECK_THROWS_AS(run_continuation(cfg), validation_error);
}
