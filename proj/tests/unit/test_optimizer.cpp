#include "fsard/analysis.hpp"
#include "fsard/error.hpp"
#include "fsard/optimizer.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>

using namespace fsard;

TEST_CASE("default grids") {
    const auto gamma = default_gamma_grid();
    CHECK(gamma.size() == 100);
    CHECK(gamma.front() == 0.01);
    CHECK(gamma.back() == 1.0);
    const auto tau = default_tau_grid();
    CHECK(tau.front() == 0.002);
    CHECK(tau.back() == 1.0);
    CHECK(std::is_sorted(tau.begin(), tau.end()));
}

TEST_CASE("grid search covers every point and finds the minimum") {
    const std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5};
    const auto result = optimize_fsa_rd(12, 3, 0.05, grid);
    CHECK(result.trace.size() == grid.size() * 3);
    double best = 1e300;
    for (int m = 2; m <= 4; ++m)
        for (double g : grid) best = std::min(best, aaoi_fsa_rd({12, m, 3, 0.05, g}).aaoi);
    CHECK(result.best_aaoi == best);
    CHECK(aaoi_fsa_rd({12, result.best_frame_size, 3, 0.05, result.best_param}).aaoi == best);
    for (std::size_t i = 1; i < result.trace.size(); ++i) {
        const auto &a = result.trace[i - 1], &b = result.trace[i];
        CHECK((a.frame_size < b.frame_size || (a.frame_size == b.frame_size && a.param < b.param)));
    }
}

TEST_CASE("near-optimal gamma is added on request") {
    const auto plain = optimize_fsa_rd(12, 3, 0.05, {0.5});
    const auto extended = optimize_fsa_rd(12, 3, 0.05, {0.5}, {true, 1});
    CHECK(plain.trace.size() == 3);
    CHECK(extended.trace.size() == 6);
    CHECK(extended.best_aaoi <= plain.best_aaoi);
}

TEST_CASE("worker count does not change the result") {
    const auto a = optimize_fsa_rd(20, 4, 0.03, default_gamma_grid(), {false, 1});
    const auto b = optimize_fsa_rd(20, 4, 0.03, default_gamma_grid(), {false, 4});
    CHECK(a.best_param == b.best_param);
    CHECK(a.best_frame_size == b.best_frame_size);
    CHECK(a.best_aaoi == b.best_aaoi);
}

TEST_CASE("lone user reserves every frame") {
    const auto result = optimize_fsa_rd(1, 1, 0.5, {0.5, 1.0});
    CHECK(result.best_param == 1.0);
    CHECK(result.best_frame_size == 2);
}

TEST_CASE("single-attempt rule evaluates one gamma per frame size") {
    const auto result = optimize_fsa_rd_one(30, 4, 0.1);
    CHECK(result.trace.size() == 4);
    CHECK(result.best_frame_size == 3);
    CHECK(result.best_param == doctest::Approx(0.4920).epsilon(1e-4));
    CHECK(result.best_aaoi == doctest::Approx(70.16).epsilon(1e-3));
}

TEST_CASE("invalid grids") {
    CHECK_THROWS_AS(optimize_fsa_rd(10, 3, 0.1, {}), DomainError);
    CHECK_THROWS_AS(optimize_fsa_rd(10, 3, 0.1, {0.0, 0.5}), ConfigError);
    CHECK_THROWS_AS(optimize_fsa_rd(10, 3, 0.1, {1.5}), ConfigError);
    CHECK_THROWS_AS(optimize_slotted_aloha(10, 0.1, {0.1}, {100'000}), DomainError);
}

TEST_CASE("slotted ALOHA search") {
    AlohaSearchOptions options;
    options.horizon_slots = 1'000'000;
    options.replications = 2;
    options.force = true;
    const auto result = optimize_slotted_aloha(5, 0.05, {0.05, 0.2, 0.5, 1.0}, options);
    CHECK(result.trace.size() == 4);
    CHECK(result.best_halfwidth > 0);
    CHECK(result.best_param != 1.0);

    // neighbouring points that are statistically indistinguishable are reported
    options.force = false;
    CHECK_THROWS_AS(optimize_slotted_aloha(5, 0.05, {0.3, 0.3001}, options), AmbiguousOptimumError);
}
