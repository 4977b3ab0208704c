#include "fsard/analysis.hpp"

#include "fsard/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fsard {

namespace {

constexpr double kUnderflow = 1e-300;
constexpr double kRouteAgreement = 1e-9;

void check_routes_agree(double direct, double via_moments) {
    const double scale = std::max(1.0, std::abs(direct));
    if (!(std::abs(direct - via_moments) <= kRouteAgreement * scale))
        throw std::logic_error(fmt::format("AAoI routes disagree: direct {:.12g}, via moments {:.12g}", direct, via_moments));
}

/// Generation-side moments shared by both schemes.
struct ArrivalMoments {
    double p;      // 1-(1-rho)^M
    double idle;   // (1-rho)^M
    double e_W, e_W2, e_l;
};

ArrivalMoments arrival_moments(const ProtocolConfig &config) {
    const double m = config.frame_size;
    ArrivalMoments a{};
    a.p = config.arrival_prob();
    a.idle = config.idle_prob();
    a.e_W = a.idle * m / a.p;
    a.e_W2 = a.idle * (1.0 + a.idle) * m * m / (a.p * a.p);
    a.e_l = 1.0 / config.rho - m * a.idle / a.p;
    return a;
}

AnalysisReport infinite_report(const ProtocolConfig &config, Scheme scheme, SlotProfile profile) {
    AnalysisReport report;
    report.config = config;
    report.scheme = scheme;
    report.profile = std::move(profile);
    report.aaoi = std::numeric_limits<double>::infinity();
    report.effectively_infinite = true;
    if (scheme == Scheme::fsa_rd_one) report.upper_bound = report.aaoi;
    return report;
}

} // namespace

double SlotProfile::slot(int alpha) const {
    if (alpha < 2 || alpha > frame_size()) return 0.0;
    return by_slot[static_cast<std::size_t>(alpha - 2)];
}

double SlotProfile::slot_sum() const {
    double sum = 0.0;
    for (double v : by_slot) sum += v;
    return sum;
}

double SlotProfile::mean_slot() const {
    double weighted = 0.0;
    for (std::size_t k = 0; k < by_slot.size(); ++k) weighted += static_cast<double>(k + 2) * by_slot[k];
    const double mean = weighted / p_success;
    return std::clamp(mean, 2.0, static_cast<double>(frame_size()));
}

SlotProfile slot_profile_from_peer_law(const ProtocolConfig &config, std::span<const double> peer_law,
                                       const OccupancyTable &table) {
    config.validate();
    const int n_users = config.users;
    const int cap = config.data_slots();
    if (static_cast<int>(peer_law.size()) != n_users) throw DomainError("peer law must cover 0..N-1 other users");
    if (table.mini_slots() != config.mini_slots || table.max_contenders() < n_users)
        throw DomainError("occupancy table does not cover the configuration");

    // Per number of other reservers n2: the tagged user's share of deliveries, overall and per data slot.
    std::vector<double> share(static_cast<std::size_t>(n_users), 0.0);
    std::vector<std::vector<double>> slot_share(static_cast<std::size_t>(n_users),
                                                std::vector<double>(static_cast<std::size_t>(cap), 0.0));
    for (int n2 = 0; n2 < n_users; ++n2) {
        const int contenders = n2 + 1;
        const CountPmf &singles = table.singletons(contenders);
        double total = 0.0;
        for (int n3 = 1; n3 <= singles.support_max(); ++n3) total += singles[n3] * std::min(n3, cap);
        share[static_cast<std::size_t>(n2)] = total / contenders;

        // Data slot d (1-based) is used iff at least d singletons exist.
        double tail = 0.0;
        auto &per_slot = slot_share[static_cast<std::size_t>(n2)];
        for (int n3 = singles.support_max(); n3 >= 1; --n3) {
            tail += singles[n3];
            if (n3 <= cap) per_slot[static_cast<std::size_t>(n3 - 1)] = tail / contenders;
        }
    }

    long double success = 0.0L;
    std::vector<long double> by_slot(static_cast<std::size_t>(cap), 0.0L);
    for (int n1 = 0; n1 < n_users; ++n1) {
        const double w = peer_law[static_cast<std::size_t>(n1)];
        if (w == 0.0) continue;
        const CountPmf reservers = binomial_pmf(n1, config.gamma);
        for (int n2 = 0; n2 <= n1; ++n2) {
            const long double weight = static_cast<long double>(w) * reservers[n2];
            if (weight == 0.0L) continue;
            success += weight * share[static_cast<std::size_t>(n2)];
            const auto &per_slot = slot_share[static_cast<std::size_t>(n2)];
            for (int d = 0; d < cap; ++d) by_slot[static_cast<std::size_t>(d)] += weight * per_slot[static_cast<std::size_t>(d)];
        }
    }

    SlotProfile profile;
    profile.p_success = clamp_probability(static_cast<double>(success));
    profile.by_slot.reserve(static_cast<std::size_t>(cap));
    for (long double v : by_slot) profile.by_slot.push_back(clamp_probability(static_cast<double>(v)));
    return profile;
}

SlotProfile p_success_fsa_rd(const ProtocolConfig &config, const SteadyState &pi) {
    config.validate();
    return p_success_fsa_rd(config, pi, OccupancyTable(config.mini_slots, config.users));
}

SlotProfile p_success_fsa_rd(const ProtocolConfig &config, const SteadyState &pi, const OccupancyTable &table) {
    config.validate();
    const int n_users = config.users;
    if (static_cast<int>(pi.pi.size()) != n_users + 1) throw DomainError("steady state does not match N+1 states");

    // A tagged active user sees n1 other active users with the size-biased law pi_{n1+1} (n1+1).
    std::vector<double> peer_law(static_cast<std::size_t>(n_users));
    double norm = 0.0;
    for (int n1 = 0; n1 < n_users; ++n1) {
        peer_law[static_cast<std::size_t>(n1)] = pi.pi[static_cast<std::size_t>(n1 + 1)] * (n1 + 1);
        norm += peer_law[static_cast<std::size_t>(n1)];
    }
    if (!(norm > 0.0)) throw DegenerateChainError("no user is ever active in the stationary law");
    for (double &w : peer_law) w /= norm;
    return slot_profile_from_peer_law(config, peer_law, table);
}

SlotProfile p_success_fsa_rd_one(const ProtocolConfig &config) {
    config.validate();
    return p_success_fsa_rd_one(config, OccupancyTable(config.mini_slots, config.users));
}

SlotProfile p_success_fsa_rd_one(const ProtocolConfig &config, const OccupancyTable &table) {
    config.validate();
    const CountPmf peers = binomial_pmf(config.users - 1, config.arrival_prob());
    return slot_profile_from_peer_law(config, peers.mass(), table);
}

double collision_free_prob(const ProtocolConfig &config) {
    config.validate();
    const double per_peer = config.gamma * config.arrival_prob() / config.mini_slots;
    return std::pow(1.0 - per_peer, config.users - 1);
}

double aaoi_from_moments(const MomentDecomposition &moments) {
    if (!(moments.e_Y > 0.0)) throw DomainError("E[Y] must be positive");
    return moments.e_Y2 / (2.0 * moments.e_Y) + moments.e_S - 0.5;
}

AnalysisReport aaoi_fsa_rd(const ProtocolConfig &config) {
    config.validate();
    return aaoi_fsa_rd(config, OccupancyTable(config.mini_slots, config.users));
}

AnalysisReport aaoi_fsa_rd(const ProtocolConfig &config, const OccupancyTable &table) {
    config.validate();
    const SteadyState pi = steady_state(build_transition_matrix(config, table));
    SlotProfile profile = p_success_fsa_rd(config, pi, table);

    const double q = config.gamma * profile.p_success;
    if (!(profile.p_success >= kUnderflow) || !(q >= kUnderflow))
        return infinite_report(config, Scheme::fsa_rd, std::move(profile));

    const double m = config.frame_size;
    const ArrivalMoments a = arrival_moments(config);

    MomentDecomposition mo;
    mo.e_W = a.e_W;
    mo.e_W2 = a.e_W2;
    mo.e_K = m / q;                          // geometric number of frames with success prob q
    mo.e_K2 = m * m * (2.0 - q) / (q * q);
    mo.e_Y = mo.e_W + mo.e_K;
    mo.e_Y2 = mo.e_W2 + mo.e_K2 + 2.0 * mo.e_W * mo.e_K;
    mo.e_l = a.e_l;
    mo.e_Z = m / (1.0 - (1.0 - q) * a.idle);
    mo.e_alpha = profile.mean_slot();
    mo.e_S = mo.e_l + mo.e_Z - m + mo.e_alpha;

    AnalysisReport report;
    report.config = config;
    report.scheme = Scheme::fsa_rd;
    report.aaoi = m / q - m / 2.0 + 1.0 / config.rho + mo.e_alpha - 0.5;
    check_routes_agree(report.aaoi, aaoi_from_moments(mo));
    report.profile = std::move(profile);
    report.moments = mo;
    return report;
}

AnalysisReport aaoi_fsa_rd_one(const ProtocolConfig &config) {
    config.validate();
    return aaoi_fsa_rd_one(config, OccupancyTable(config.mini_slots, config.users));
}

AnalysisReport aaoi_fsa_rd_one(const ProtocolConfig &config, const OccupancyTable &table) {
    config.validate();
    SlotProfile profile = p_success_fsa_rd_one(config, table);

    const double q = config.gamma * profile.p_success;
    if (!(profile.p_success >= kUnderflow) || !(q >= kUnderflow))
        return infinite_report(config, Scheme::fsa_rd_one, std::move(profile));

    const double m = config.frame_size;
    const ArrivalMoments a = arrival_moments(config);

    // K: success w.p. q ends after M slots; otherwise M + W' + K' with independent copies.
    MomentDecomposition mo;
    mo.e_W = a.e_W;
    mo.e_W2 = a.e_W2;
    mo.e_K = (m + (1.0 - q) * a.e_W) / q;
    mo.e_K2 = (m * m + (1.0 - q) * (a.e_W2 + 2.0 * mo.e_K * a.e_W + 2.0 * m * (mo.e_K + a.e_W))) / q;
    mo.e_Y = mo.e_W + mo.e_K;
    mo.e_Y2 = mo.e_W2 + mo.e_K2 + 2.0 * mo.e_W * mo.e_K;
    mo.e_l = a.e_l;
    mo.e_Z = m;
    mo.e_alpha = profile.mean_slot();
    mo.e_S = mo.e_l + mo.e_alpha;

    // Shared base so that aaoi <= upper_bound <= aaoi + M holds exactly in floating point.
    const double base = m / (q * a.p) - m * a.idle / a.p + 1.0 / config.rho - (m + 1.0) / 2.0;

    AnalysisReport report;
    report.config = config;
    report.scheme = Scheme::fsa_rd_one;
    report.aaoi = base + mo.e_alpha;
    report.upper_bound = base + m;
    check_routes_agree(report.aaoi, aaoi_from_moments(mo));
    report.profile = std::move(profile);
    report.moments = mo;
    return report;
}

double aaoi_upper_bound_one(const ProtocolConfig &config) {
    return *aaoi_fsa_rd_one(config).upper_bound;
}

double near_optimal_gamma(int users, int mini_slots, int frame_size, double rho) {
    validate_frame_parameters(users, mini_slots, frame_size, rho);
    const double expected_active = users * frame_arrival_prob(rho, frame_size);
    return std::min(1.0, mini_slots / expected_active);
}

} // namespace fsard
