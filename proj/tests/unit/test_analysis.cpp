#include "fsard/analysis.hpp"
#include "fsard/combinatorics.hpp"
#include "fsard/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fsard;

namespace {

ProtocolConfig random_config(std::mt19937_64 &gen, double rho = -1) {
    std::uniform_int_distribution<int> users(1, 40), slots(1, 8);
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    ProtocolConfig c;
    c.users = users(gen);
    c.mini_slots = slots(gen);
    c.frame_size = std::uniform_int_distribution<int>(2, c.mini_slots + 1)(gen);
    c.rho = rho > 0 ? rho : unit(gen);
    c.gamma = unit(gen);
    return c;
}

/// Collision-free reservation probability as a triple sum over peers, reservers and singletons.
double collision_free_triple_sum(const ProtocolConfig &c) {
    const auto peers = binomial_pmf(c.users - 1, c.arrival_prob());
    double total = 0.0;
    for (int n1 = 0; n1 < c.users; ++n1) {
        const auto reservers = reservation_count_pmf(n1, c.gamma);
        for (int n2 = 0; n2 <= n1; ++n2) {
            const auto singles = singleton_count_pmf(n2 + 1, c.mini_slots);
            for (int n3 = 1; n3 <= std::min(c.mini_slots, n2 + 1); ++n3)
                total += peers[n1] * reservers[n2] * singles[n3] * n3 / (n2 + 1.0);
        }
    }
    return total;
}

double profile_sum_check(const SlotProfile &profile) { return std::abs(profile.slot_sum() - profile.p_success); }

} // namespace

TEST_CASE("lone user always delivers in the first data slot") {
    for (int m = 2; m <= 4; ++m) {
        const ProtocolConfig c{1, m, 3, 0.2, 0.6};
        const auto rd = aaoi_fsa_rd(c).profile;
        const auto one = p_success_fsa_rd_one(c);
        CHECK(rd.p_success == doctest::Approx(1.0));
        CHECK(rd.slot(2) == doctest::Approx(1.0));
        CHECK(one.p_success == doctest::Approx(1.0));
        CHECK(one.slot(2) == doctest::Approx(1.0));
        CHECK(collision_free_prob(c) == 1.0);
    }
}

TEST_CASE("two users on one mini-slot succeed only alone") {
    const ProtocolConfig c{2, 2, 1, 0.3, 1.0};
    const auto pi = steady_state(build_transition_matrix(c));
    const auto profile = p_success_fsa_rd(c, pi);
    CHECK(profile.p_success == doctest::Approx(pi.pi[1] / (pi.pi[1] + 2 * pi.pi[2])).epsilon(1e-12));
    CHECK(collision_free_prob({2, 2, 1, 1.0, 1.0}) == 0.0);
}

TEST_CASE("slot profiles sum to the success probability") {
    std::mt19937_64 gen(3);
    for (int k = 0; k < 80; ++k) {
        const auto c = random_config(gen);
        CHECK(profile_sum_check(aaoi_fsa_rd(c).profile) <= 1e-10);
        CHECK(profile_sum_check(p_success_fsa_rd_one(c)) <= 1e-10);
    }
}

TEST_CASE("collision-free probability: triple sum equals closed form") {
    CHECK(std::abs(collision_free_triple_sum({30, 3, 6, 0.04, 0.5}) - collision_free_prob({30, 3, 6, 0.04, 0.5})) <= 1e-9);
    std::mt19937_64 gen(5);
    for (int k = 0; k < 80; ++k) {
        const auto c = random_config(gen);
        CHECK(std::abs(collision_free_triple_sum(c) - collision_free_prob(c)) <= 1e-9);
    }
}

TEST_CASE("one-shot success never exceeds the collision-free probability") {
    for (int m = 2; m <= 5; ++m)
        for (int k = 1; k <= 100; ++k) {
            const ProtocolConfig c{30, m, 4, 0.05, k / 100.0};
            CHECK(p_success_fsa_rd_one(c).p_success <= collision_free_prob(c) + 1e-12);
        }
}

TEST_CASE("direct formula and moment route agree") {
    std::mt19937_64 gen(11);
    for (int k = 0; k < 80; ++k) {
        const auto c = random_config(gen);
        for (const auto &report : {aaoi_fsa_rd(c), aaoi_fsa_rd_one(c)}) {
            const auto &mo = report.moments;
            CHECK(std::abs(aaoi_from_moments(mo) - report.aaoi) <= 1e-9 * std::max(1.0, report.aaoi));
            CHECK(std::abs(mo.e_Y - mo.e_W - mo.e_K) <= 1e-9 * mo.e_Y);
            CHECK(std::abs(mo.e_Y2 - mo.e_W2 - mo.e_K2 - 2 * mo.e_W * mo.e_K) <= 1e-9 * mo.e_Y2);
            CHECK(mo.e_alpha >= 2 - 1e-12);
            CHECK(mo.e_alpha <= c.frame_size + 1e-12);
            CHECK(mo.e_l >= 1 - 1e-12);
            CHECK(mo.e_l <= c.frame_size + 1e-12);
        }
    }
}

TEST_CASE("deterministic inter-departure") {
    MomentDecomposition mo;
    mo.e_Y = 4;
    mo.e_Y2 = 16;
    mo.e_S = 3;
    CHECK(aaoi_from_moments(mo) == doctest::Approx(4.5));
    mo.e_Y = 0;
    CHECK_THROWS_AS(aaoi_from_moments(mo), DomainError);
}

TEST_CASE("moment closed forms against truncated series") {
    const ProtocolConfig c{20, 3, 4, 0.07, 0.4};
    const double m = c.frame_size, idle = c.idle_prob(), p = c.arrival_prob();

    // l: slots from the latest generation in a frame to the frame end
    double e_l = 0;
    for (int j = 0; j < c.frame_size; ++j) e_l += (j + 1) * c.rho * std::pow(1 - c.rho, j) / p;

    // W = M G with G geometric on {0, 1, ...}, success p
    double e_w = 0, e_w2 = 0;
    for (int g = 0;; ++g) {
        const double mass = std::pow(idle, g) * p;
        if (mass < 1e-18 && g > 10) break;
        e_w += mass * g * m;
        e_w2 += mass * g * m * g * m;
    }

    SUBCASE("multiple attempts") {
        const auto report = aaoi_fsa_rd(c);
        const double q = c.gamma * report.profile.p_success;
        double e_k = 0, e_k2 = 0, e_z = 0, norm = 0;
        for (int x = 1;; ++x) {
            const double mass = std::pow(1 - q, x - 1) * q;
            const double kept = std::pow((1 - q) * idle, x - 1) * q;
            if (mass < 1e-18 && kept < 1e-18) break;
            e_k += mass * x * m;
            e_k2 += mass * x * m * x * m;
            e_z += kept * x * m;
            norm += kept;
        }
        const auto &mo = report.moments;
        CHECK(mo.e_l == doctest::Approx(e_l).epsilon(1e-10));
        CHECK(mo.e_W == doctest::Approx(e_w).epsilon(1e-10));
        CHECK(mo.e_W2 == doctest::Approx(e_w2).epsilon(1e-10));
        CHECK(mo.e_K == doctest::Approx(e_k).epsilon(1e-10));
        CHECK(mo.e_K2 == doctest::Approx(e_k2).epsilon(1e-10));
        CHECK(mo.e_Z == doctest::Approx(e_z / norm).epsilon(1e-10));
    }

    SUBCASE("single attempt") {
        const auto report = aaoi_fsa_rd_one(c);
        const double q = c.gamma * report.profile.p_success;
        // K = x M plus a fresh wait after each of the x-1 failures
        const double var_w = e_w2 - e_w * e_w;
        double e_k = 0, e_k2 = 0;
        for (int x = 1;; ++x) {
            const double mass = std::pow(1 - q, x - 1) * q;
            if (mass < 1e-18) break;
            const double n = x - 1.0;
            e_k += mass * (x * m + n * e_w);
            e_k2 += mass * (x * m * x * m + 2 * x * m * n * e_w + n * var_w + n * n * e_w * e_w);
        }
        const auto &mo = report.moments;
        CHECK(mo.e_K == doctest::Approx(e_k).epsilon(1e-10));
        CHECK(mo.e_K2 == doctest::Approx(e_k2).epsilon(1e-10));
    }
}

TEST_CASE("reference configurations") {
    CHECK(aaoi_fsa_rd({30, 3, 4, 0.02, 0.38}).aaoi == doctest::Approx(72.38).epsilon(1e-3));
    CHECK(aaoi_fsa_rd({30, 3, 6, 0.04, 0.35}).aaoi == doctest::Approx(56.53).epsilon(1e-3));
    CHECK(aaoi_fsa_rd({50, 3, 6, 0.04, 0.16}).aaoi == doctest::Approx(92.84).epsilon(1e-3));
    CHECK(aaoi_fsa_rd_one({30, 3, 4, 0.1, 0.4920}).aaoi == doctest::Approx(70.16).epsilon(1e-3));
    CHECK(aaoi_fsa_rd_one({30, 4, 8, 0.04, 1.0}).aaoi == doctest::Approx(55.67).epsilon(1e-3));
}

TEST_CASE("schemes coincide when every frame brings an update") {
    std::mt19937_64 gen(13);
    for (int k = 0; k < 40; ++k) {
        const auto c = random_config(gen, 1.0);
        const auto rd = aaoi_fsa_rd(c), one = aaoi_fsa_rd_one(c);
        CHECK(std::abs(rd.aaoi - one.aaoi) <= 1e-9);
        CHECK(std::abs(rd.profile.p_success - one.profile.p_success) <= 1e-9);
        for (int a = 2; a <= c.frame_size; ++a) CHECK(std::abs(rd.profile.slot(a) - one.profile.slot(a)) <= 1e-9);
    }
}

TEST_CASE("upper bound") {
    const ProtocolConfig c{30, 3, 4, 0.1, 0.492};
    const auto report = aaoi_fsa_rd_one(c);
    const double p = c.arrival_prob(), idle = c.idle_prob(), m = c.frame_size;
    const double direct = m / (c.gamma * report.profile.p_success * p) - m * idle / p + 1 / c.rho + (m - 1) / 2;
    CHECK(aaoi_upper_bound_one(c) == doctest::Approx(direct).epsilon(1e-12));
    // replacing E[alpha] by M is the only difference
    CHECK(aaoi_upper_bound_one(c) - report.aaoi == doctest::Approx(m - report.moments.e_alpha).epsilon(1e-10));
    REQUIRE(report.upper_bound);
    CHECK(*report.upper_bound == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("near-optimal gamma") {
    CHECK(near_optimal_gamma(30, 4, 3, 0.08) == doctest::Approx(0.6025).epsilon(1e-4));
    CHECK(near_optimal_gamma(30, 4, 3, 0.1) == doctest::Approx(0.4920).epsilon(1e-4));
    CHECK(near_optimal_gamma(30, 6, 3, 0.04) == 1.0);

    // stationary point of gamma * collision_free_prob when unclamped
    for (int m = 2; m <= 5; ++m) {
        const int n = 40, v = 4;
        const double rho = 0.08;
        const double g = near_optimal_gamma(n, v, m, rho);
        REQUIRE(g < 1.0);
        auto f = [&](double x) { return x * collision_free_prob({n, m, v, rho, x}); };
        const double h = 1e-5;
        CHECK(std::abs((f(g + h) - f(g - h)) / (2 * h)) <= 1e-8);
    }

    double prev = 2;
    for (int n = 5; n <= 60; n += 5) {
        const double g = near_optimal_gamma(n, 4, 3, 0.05);
        CHECK(g <= prev);
        prev = g;
    }
    prev = 2;
    for (double rho = 0.01; rho <= 0.2; rho += 0.01) {
        const double g = near_optimal_gamma(30, 4, 3, rho);
        CHECK(g <= prev);
        prev = g;
    }
    prev = 0;
    for (int v = 1; v <= 10; ++v) {
        const double g = near_optimal_gamma(30, v, 2, 0.05);
        CHECK(g >= prev);
        prev = g;
    }
}

TEST_CASE("invalid configurations name the parameter") {
    try {
        aaoi_fsa_rd({30, 6, 4, 0.1, 0.5});
        FAIL("expected a ConfigError");
    } catch (const ConfigError &e) {
        CHECK(e.parameter() == "M");
    }
    CHECK_THROWS_AS(aaoi_fsa_rd_one({30, 3, 4, 0.0, 0.5}), ConfigError);
    CHECK_THROWS_AS(aaoi_fsa_rd_one({30, 3, 4, 0.1, 0.0}), ConfigError);
    CHECK_THROWS_AS(aaoi_fsa_rd_one({0, 3, 4, 0.1, 0.5}), ConfigError);
}
