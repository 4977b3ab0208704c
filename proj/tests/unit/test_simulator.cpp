#include "fsard/analysis.hpp"
#include "fsard/error.hpp"
#include "fsard/rng.hpp"
#include "fsard/serialize.hpp"
#include "fsard/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace fsard;

namespace {

double mean(const std::vector<double> &v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double stderr_of_mean(const std::vector<double> &v) {
    const double mu = mean(v);
    double ss = 0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

/// Per-replication reservation success ratios.
std::vector<double> success_ratios(const SchemeSpec &spec, int reps, std::int64_t horizon) {
    SimOptions options;
    options.record_frames = true;
    std::vector<double> out;
    for (int r = 0; r < reps; ++r) {
        const auto res = simulate(spec, horizon, 10'000, derive_stream_seed(77, static_cast<std::uint64_t>(r)), options);
        out.push_back(static_cast<double>(res.frames->reservation_wins) / static_cast<double>(res.frames->reservations));
    }
    return out;
}

} // namespace

TEST_CASE("seed derivation") {
    std::uint64_t state = 0;
    CHECK(splitmix64_next(state) == 0xE220A8397B1DCDAFULL);
    CHECK(derive_stream_seed(0, 0) == 0xE220A8397B1DCDAFULL);
    CHECK(derive_stream_seed(5, 1) != derive_stream_seed(5, 0));
}

TEST_CASE("variate mappings") {
    Rng rng(1);
    const int n = 200'000;
    double geo = 0, uni = 0;
    std::vector<int> bins(5, 0);
    for (int i = 0; i < n; ++i) {
        geo += static_cast<double>(rng.geometric(0.25));
        uni += rng.uniform();
        ++bins[rng.below(5)];
    }
    CHECK(geo / n == doctest::Approx(4.0).epsilon(0.02));
    CHECK(uni / n == doctest::Approx(0.5).epsilon(0.01));
    for (int b : bins) CHECK(b == doctest::Approx(n / 5.0).epsilon(0.02));
    CHECK(rng.geometric(1.0) == 1);
}

TEST_CASE("saturated single user under slotted ALOHA has unit age") {
    // generated at slot start, sent and received in the same slot: age resets to 1 every slot
    const auto five = simulate(SchemeSpec::slotted_aloha({1, 1.0, 1.0}), 5, 0, 3);
    CHECK(five.network_aaoi == 1.0);
    CHECK(five.reception_count == 5);
    const auto longer = simulate_slotted_aloha({1, 1.0, 1.0}, 10'000, 100, 3);
    CHECK(longer.network_aaoi == 1.0);
}

TEST_CASE("single user under slotted ALOHA matches the renewal value") {
    // Each update is received in its own slot: AoI is 1 + slots since the last generation,
    // so the mean is 1/rho for a Bernoulli(rho) generation process.
    const auto res = simulate(SchemeSpec::slotted_aloha({1, 0.2, 1.0}), 2'000'000, 1'000, 8);
    CHECK(res.network_aaoi == doctest::Approx(5.0).epsilon(0.01));
}

TEST_CASE("framed simulation tracks the analysis for a lone user") {
    const ProtocolConfig c{1, 3, 2, 0.3, 1.0};
    const auto res = simulate(SchemeSpec::fsa_rd(c), 3'000'000, 3'000, 4);
    CHECK(res.network_aaoi == doctest::Approx(aaoi_fsa_rd(c).aaoi).epsilon(0.005));
    const auto one = simulate(SchemeSpec::fsa_rd_one({1, 3, 2, 0.3, 0.6}), 3'000'000, 3'000, 4);
    CHECK(one.network_aaoi == doctest::Approx(aaoi_fsa_rd_one({1, 3, 2, 0.3, 0.6}).aaoi).epsilon(0.01));
}

TEST_CASE("reservation success frequency matches the analysis") {
    SUBCASE("multiple attempts") {
        const ProtocolConfig c{30, 3, 4, 0.1, 0.15};
        const auto ratios = success_ratios(SchemeSpec::fsa_rd(c), 10, 1'000'000);
        CHECK(std::abs(mean(ratios) - aaoi_fsa_rd(c).profile.p_success) <= 3 * stderr_of_mean(ratios));
    }
    SUBCASE("single attempt") {
        const ProtocolConfig c{30, 3, 4, 0.1, 0.492};
        const auto ratios = success_ratios(SchemeSpec::fsa_rd_one(c), 10, 1'000'000);
        CHECK(std::abs(mean(ratios) - p_success_fsa_rd_one(c).p_success) <= 3 * stderr_of_mean(ratios));
    }
}

TEST_CASE("fixed seeds reproduce results") {
    const auto spec = SchemeSpec::fsa_rd({10, 3, 4, 0.05, 0.5});
    SimOptions options;
    options.record_trace = true;
    options.record_frames = true;
    const auto a = simulate(spec, 300'000, 3'000, 42, options);
    const auto b = simulate(spec, 300'000, 3'000, 42, options);
    const auto c = simulate(spec, 300'000, 3'000, 43, options);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(a.network_aaoi != c.network_aaoi);

    const auto aloha = SchemeSpec::slotted_aloha({10, 0.05, 0.1});
    CHECK(to_json(simulate(aloha, 200'000, 1'000, 5)).dump() == to_json(simulate(aloha, 200'000, 1'000, 5)).dump());

    const auto par = simulate_replications(spec, 200'000, 2'000, 9, 3, {}, 3);
    const auto seq = simulate_replications(spec, 200'000, 2'000, 9, 3, {}, 1);
    CHECK(par.mean_aaoi == seq.mean_aaoi);
    CHECK(par.runs[1].seed == derive_stream_seed(9, 1));
}

TEST_CASE("per-user ages average to the network age") {
    const auto res = simulate(SchemeSpec::fsa_rd_one({6, 2, 3, 0.1, 0.7}), 200'000, 2'000, 1);
    CHECK(res.per_user_aaoi.size() == 6);
    CHECK(mean(res.per_user_aaoi) == doctest::Approx(res.network_aaoi).epsilon(1e-12));
}

TEST_CASE("trace csv") {
    std::ostringstream csv;
    SimOptions options;
    options.trace_csv = &csv;
    const auto res = simulate(SchemeSpec::fsa_rd({5, 3, 4, 0.1, 0.5}), 50'000, 1'000, 2, options);
    std::istringstream lines(csv.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header == "reception_index,t_prime,generation_slot,S,X,Y,W,K,alpha,l,Z,user");
    int rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == res.trace->total.receptions);
    CHECK(rows == res.reception_count);
    CHECK_THROWS_AS(simulate(SchemeSpec::slotted_aloha({5, 0.1, 0.2}), 50'000, 1'000, 2, options), DomainError);
}

TEST_CASE("empirical moments need enough receptions") {
    SimOptions options;
    options.record_trace = true;
    const auto few = simulate(SchemeSpec::fsa_rd({2, 2, 1, 0.01, 0.5}), 20'000, 100, 2, options);
    CHECK_THROWS_AS(empirical_moment_report(few), InsufficientSamplesError);
    const auto none = simulate(SchemeSpec::fsa_rd({2, 2, 1, 0.01, 0.5}), 20'000, 100, 2);
    CHECK_THROWS_AS(empirical_moment_report(none), DomainError);
}

TEST_CASE("empirical moments agree with the analysis") {
    const ProtocolConfig c{10, 3, 4, 0.05, 0.5};
    SimOptions options;
    options.record_trace = true;
    const auto res = simulate(SchemeSpec::fsa_rd(c), 4'000'000, 30'000, 12, options);
    const auto emp = empirical_moment_report(res);
    const auto ana = aaoi_fsa_rd(c).moments;
    CHECK(emp.moments.e_K == doctest::Approx(ana.e_K).epsilon(0.02));
    CHECK(emp.moments.e_S == doctest::Approx(ana.e_S).epsilon(0.02));
    CHECK(emp.moments.e_Y == doctest::Approx(ana.e_Y).epsilon(0.02));
    CHECK(emp.moments.e_alpha == doctest::Approx(ana.e_alpha).epsilon(0.01));
    CHECK(aaoi_from_moments(emp.moments) == doctest::Approx(res.network_aaoi).epsilon(0.02));
}

TEST_CASE("argument validation") {
    const auto spec = SchemeSpec::fsa_rd({5, 3, 4, 0.1, 0.5});
    CHECK_THROWS_AS(simulate(spec, 100, 100, 1), DomainError);
    CHECK_THROWS_AS(simulate(spec, 100, -1, 1), DomainError);
    CHECK_THROWS_AS(simulate(SchemeSpec::fsa_rd({5, 7, 4, 0.1, 0.5}), 1000, 0, 1), ConfigError);
    CHECK_THROWS_AS(simulate(SchemeSpec::slotted_aloha({5, 0.1, 0.0}), 1000, 0, 1), ConfigError);
    CHECK_THROWS_AS(simulate_replications(spec, 1000, 0, 1, 0), DomainError);
}

TEST_CASE("confidence half-width") {
    CHECK(confidence_halfwidth({4.0}) == 0.0);
    CHECK(confidence_halfwidth({1.0, 2.0, 3.0}) == doctest::Approx(4.302652729749464 / std::sqrt(3.0)).epsilon(1e-12));
}
