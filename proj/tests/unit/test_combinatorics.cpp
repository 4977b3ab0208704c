#include "fsard/combinatorics.hpp"
#include "fsard/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace fsard;

TEST_CASE("binomial coefficients") {
    CHECK(binomial_coefficient(5, 2) == 10.0);
    CHECK(binomial_coefficient(60, 30) == doctest::Approx(1.1826458156486142e17).epsilon(1e-14));
    CHECK(binomial_coefficient(100, 50) == doctest::Approx(1.008913445455642e29).epsilon(1e-12));
    CHECK(binomial_coefficient(4, 5) == 0.0);
    CHECK(log_binomial_coefficient(1000, 500) == doctest::Approx(689.467261567851).epsilon(1e-12));
}

TEST_CASE("pmf clamping") {
    CHECK(clamp_probability(-1e-13) == 0.0);
    CHECK(clamp_probability(1.0 + 1e-13) == 1.0);
    CHECK_THROWS_AS(clamp_probability(-1e-9), std::logic_error);
    const CountPmf pmf({0.25, -1e-14, 0.75});
    CHECK(pmf[1] == 0.0);
    CHECK(pmf[7] == 0.0);
    CHECK(pmf.mean() == doctest::Approx(1.5));
}

TEST_CASE("reservation count is binomial") {
    const auto pmf = reservation_count_pmf(3, 0.5);
    CHECK(pmf[0] == doctest::Approx(0.125));
    CHECK(pmf[1] == doctest::Approx(0.375));
    CHECK(reservation_count_pmf(0, 0.3)[0] == 1.0);
    CHECK(reservation_count_pmf(4, 1.0)[4] == 1.0);
}

TEST_CASE("singleton count small cases") {
    CHECK(singleton_count_pmf(0, 4)[0] == 1.0);
    CHECK(singleton_count_pmf(1, 4)[1] == 1.0);
    const auto two = singleton_count_pmf(2, 4);
    CHECK(two[0] == doctest::Approx(0.25));
    CHECK(two[1] == 0.0);
    CHECK(two[2] == doctest::Approx(0.75));
    CHECK(singleton_count_pmf(3, 1)[0] == 1.0);
}

TEST_CASE("singleton count matches exhaustive enumeration") {
    for (int v = 1; v <= 6; ++v)
        for (int j = 0; j <= 7; ++j) {
            const auto brute = test::enumerate_singletons(j, v);
            const auto pmf = singleton_count_pmf(j, v);
            REQUIRE(pmf.support_max() == static_cast<int>(brute.size()) - 1);
            for (std::size_t k = 0; k < brute.size(); ++k)
                CHECK(std::abs(pmf[static_cast<int>(k)] - brute[k]) <= 1e-12);
        }
}

TEST_CASE("singleton count matches the extended-precision alternating sum") {
    for (int v = 1; v <= 10; ++v)
        for (int j = 0; j <= 10; ++j) {
            const auto ref = test::alternating_sum_singletons(j, v);
            const auto pmf = singleton_count_pmf(j, v);
            for (std::size_t k = 0; k < ref.size(); ++k)
                CHECK(std::abs(pmf[static_cast<int>(k)] - ref[k]) <= 1e-9);
        }
}

TEST_CASE("singleton mean and normalisation") {
    for (int v : {1, 3, 8, 20, 64, 70})
        for (int j : {0, 1, 5, 30, 64, 90}) {
            const auto pmf = singleton_count_pmf(j, v);
            CHECK(pmf.total() == doctest::Approx(1.0).epsilon(1e-10));
            const double expected = j == 0 ? 0.0 : j * std::pow(1.0 - 1.0 / v, j - 1);
            CHECK(std::abs(pmf.mean() - expected) <= 1e-10);
        }
}

TEST_CASE("exact and extended occupancy tables agree") {
    const OccupancyTable exact(12, 40, OccupancyTable::Method::exact);
    const OccupancyTable extended(12, 40, OccupancyTable::Method::extended);
    for (int j = 0; j <= 40; ++j)
        for (int k = 0; k <= 12; ++k)
            CHECK(std::abs(exact.singletons(j)[k] - extended.singletons(j)[k]) <= 1e-13);
}

TEST_CASE("capped success folds the tail") {
    const auto r = singleton_count_pmf(2, 4);
    const auto capped = capped_success_pmf(2, 4, 2);
    CHECK(capped.support_max() == 1);
    CHECK(capped[0] == doctest::Approx(r[0]));
    CHECK(capped[1] == doctest::Approx(r[1] + r[2]));
    CHECK(capped_success_pmf(0, 4, 3)[0] == 1.0);

    const auto brute = test::enumerate_singletons(6, 6);
    const auto six = capped_success_pmf(6, 6, 4);
    double tail = 0.0;
    for (std::size_t k = 3; k < brute.size(); ++k) tail += brute[k];
    for (int k = 0; k < 3; ++k) CHECK(std::abs(six[k] - brute[static_cast<std::size_t>(k)]) <= 1e-12);
    CHECK(std::abs(six[3] - tail) <= 1e-12);

    const auto full = capped_success_pmf(5, 3, 4);
    const auto plain = singleton_count_pmf(5, 3);
    for (int k = 0; k <= 3; ++k) CHECK(full[k] == doctest::Approx(plain[k]));
    CHECK_THROWS(capped_success_pmf(3, 3, 5));
    CHECK_THROWS(capped_success_pmf(3, 3, 1));
}

TEST_CASE("successful update pmf") {
    CHECK(successful_update_pmf(0, 0.4, 3, 3)[0] == 1.0);
    const auto lone = successful_update_pmf(1, 1.0, 4, 3);
    CHECK(lone[0] == 0.0);
    CHECK(lone[1] == 1.0);

    // Monte Carlo frame oracle: i users reserve w.p. gamma into V mini-slots, successes capped at M-1.
    const int active = 4, v = 3, m = 3;
    const double gamma = 0.5;
    const int trials = 1'000'000;
    Rng rng(2024);
    std::vector<double> counts(m, 0.0);
    for (int t = 0; t < trials; ++t) {
        int load[3] = {0, 0, 0};
        for (int u = 0; u < active; ++u)
            if (rng.bernoulli(gamma)) ++load[rng.below(v)];
        int singles = 0;
        for (int l : load) singles += l == 1;
        counts[static_cast<std::size_t>(std::min(singles, m - 1))] += 1.0;
    }
    const auto pmf = successful_update_pmf(active, gamma, v, m);
    for (int s = 0; s < m; ++s) {
        const double f = counts[static_cast<std::size_t>(s)] / trials;
        const double se = std::sqrt(pmf[s] * (1.0 - pmf[s]) / trials);
        CHECK(std::abs(f - pmf[s]) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("invalid arguments are rejected") {
    CHECK_THROWS(singleton_count_pmf(-1, 3));
    CHECK_THROWS(singleton_count_pmf(3, 0));
    CHECK_THROWS(reservation_count_pmf(3, 1.5));
}
