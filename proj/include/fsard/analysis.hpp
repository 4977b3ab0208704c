#pragma once

#include "fsard/combinatorics.hpp"
#include "fsard/config.hpp"
#include "fsard/markov.hpp"

#include <optional>
#include <span>
#include <vector>

namespace fsard {

/// Per-slot delivery probabilities of a reserving user.
///
/// `slot(alpha)` is the probability that the user delivers in frame slot alpha
/// (data slot alpha-1), alpha in 2..M. The entries sum to `p_success`.
struct SlotProfile {
    std::vector<double> by_slot;    // index 0 <-> alpha = 2
    double p_success = 0.0;

    int frame_size() const { return static_cast<int>(by_slot.size()) + 1; }
    double slot(int alpha) const;
    double slot_sum() const;
    /// sum alpha * slot(alpha) / p_success
    double mean_slot() const;
};

/// Moments of the inter-departure / service-time decomposition, in slots.
struct MomentDecomposition {
    double e_W = 0, e_W2 = 0;   // wait for a fresh update after a delivery frame
    double e_K = 0, e_K2 = 0;   // from availability to the end of the delivery frame
    double e_Y = 0, e_Y2 = 0;   // frame-level inter-departure, Y = W + K
    double e_S = 0;             // service time of a delivered update
    double e_l = 0;             // slots from generation to the start of its first transmit frame
    double e_Z = 0;             // frames spent in transmission, times M
    double e_alpha = 0;         // delivery slot within the frame
};

struct AnalysisReport {
    ProtocolConfig config;
    Scheme scheme = Scheme::fsa_rd;
    SlotProfile profile;
    MomentDecomposition moments;
    double aaoi = 0.0;
    std::optional<double> upper_bound;   // FSA-RD-One only
    bool effectively_infinite = false;   // p_success underflowed
};

/// Success probability of a reserving user under FSA-RD, using the size-biased
/// stationary active-user law.
SlotProfile p_success_fsa_rd(const ProtocolConfig &config, const SteadyState &pi);
SlotProfile p_success_fsa_rd(const ProtocolConfig &config, const SteadyState &pi, const OccupancyTable &table);

/// Same for FSA-RD-One, where each peer is active independently with 1-(1-rho)^M.
SlotProfile p_success_fsa_rd_one(const ProtocolConfig &config);
SlotProfile p_success_fsa_rd_one(const ProtocolConfig &config, const OccupancyTable &table);

/// Generic profile for a given law of the number of *other* active users (0..N-1).
SlotProfile slot_profile_from_peer_law(const ProtocolConfig &config, std::span<const double> peer_law,
                                       const OccupancyTable &table);

/// Probability that a reserving user picks a mini-slot nobody else picks (FSA-RD-One):
/// (1 - gamma (1-(1-rho)^M) / V)^(N-1).
double collision_free_prob(const ProtocolConfig &config);

/// E[Y^2] / (2 E[Y]) + E[S] - 1/2. Throws DomainError if e_Y <= 0.
double aaoi_from_moments(const MomentDecomposition &moments);

AnalysisReport aaoi_fsa_rd(const ProtocolConfig &config);
AnalysisReport aaoi_fsa_rd(const ProtocolConfig &config, const OccupancyTable &table);

AnalysisReport aaoi_fsa_rd_one(const ProtocolConfig &config);
AnalysisReport aaoi_fsa_rd_one(const ProtocolConfig &config, const OccupancyTable &table);

/// FSA-RD-One AAoI with the delivery slot replaced by its worst case M.
double aaoi_upper_bound_one(const ProtocolConfig &config);

/// min{1, V / (N (1-(1-rho)^M))}
double near_optimal_gamma(int users, int mini_slots, int frame_size, double rho);

} // namespace fsard
