#pragma once

#include "fsard/analysis.hpp"
#include "fsard/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

namespace fsard {

/// Which protocol to simulate, with its parameters.
class SchemeSpec {
public:
    static SchemeSpec fsa_rd(const ProtocolConfig &config) { return {Scheme::fsa_rd, config}; }
    static SchemeSpec fsa_rd_one(const ProtocolConfig &config) { return {Scheme::fsa_rd_one, config}; }
    static SchemeSpec slotted_aloha(const AlohaConfig &config) { return {Scheme::slotted_aloha, config}; }
    static SchemeSpec framed(Scheme kind, const ProtocolConfig &config);

    Scheme kind() const { return kind_; }
    bool is_framed() const { return kind_ != Scheme::slotted_aloha; }
    const ProtocolConfig &protocol() const;
    const AlohaConfig &aloha() const;
    int users() const;
    void validate() const;

private:
    SchemeSpec(Scheme kind, std::variant<ProtocolConfig, AlohaConfig> config) : kind_(kind), config_(config) {}

    Scheme kind_;
    std::variant<ProtocolConfig, AlohaConfig> config_;
};

struct SimOptions {
    bool record_trace = false;          // per-reception moment sums (framed schemes)
    bool record_frames = false;         // active-user histogram and frame transition counts
    std::ostream *trace_csv = nullptr;  // per-reception rows; implies record_trace
    int batches = 32;                   // time batches for batch-means standard errors
};

/// Running sums over post-warmup receptions.
///
/// Per-reception quantities (S, l, Z, alpha) use every reception; inter-departure
/// quantities (X, Y, W, K and S_{i-1} X_i) need the same user's previous reception.
struct ReceptionSums {
    std::int64_t receptions = 0;
    double s = 0, s2 = 0, l = 0, z = 0, alpha = 0, alpha2 = 0;
    std::int64_t pairs = 0;
    double x = 0, x2 = 0, y = 0, y2 = 0, w = 0, w2 = 0, k = 0, k2 = 0, sx = 0;

    void merge(const ReceptionSums &other);
};

struct TraceSummary {
    ReceptionSums total;
    std::vector<ReceptionSums> batches;
};

struct FrameStats {
    std::int64_t frames = 0;
    std::vector<std::int64_t> active_histogram;   // N+1 bins, frame starts after warmup
    std::vector<std::int64_t> transitions;        // (N+1)^2 row-major, consecutive post-warmup frames
    std::int64_t reservations = 0;                // reservation packets sent
    std::int64_t reservation_wins = 0;            // of which got a data slot

    std::int64_t transition(int from, int to) const;
};

struct SimResult {
    SchemeSpec scheme = SchemeSpec::fsa_rd({});
    std::int64_t horizon_slots = 0;
    std::int64_t warmup_slots = 0;
    std::uint64_t seed = 0;
    double network_aaoi = 0.0;
    std::vector<double> per_user_aaoi;
    std::int64_t reception_count = 0;
    double ci_halfwidth = 0.0;            // 0 for a single run
    std::optional<TraceSummary> trace;
    std::optional<FrameStats> frames;
};

/// Warmup used when none is given: 10^4 frames (10^4 slots for slotted ALOHA).
std::int64_t default_warmup(const SchemeSpec &scheme);

/// Slot-level simulation. AoI starts at 1 for every user with empty buffers; the
/// time average runs over slots [warmup, horizon).
SimResult simulate(const SchemeSpec &scheme, std::int64_t horizon_slots, std::int64_t warmup_slots,
                   std::uint64_t seed, const SimOptions &options = {});

SimResult simulate_slotted_aloha(const AlohaConfig &config, std::int64_t horizon_slots, std::int64_t warmup_slots,
                                 std::uint64_t seed);

struct ReplicatedResult {
    std::vector<SimResult> runs;     // replication r seeded with derive_stream_seed(seed, r)
    double mean_aaoi = 0.0;
    double ci_halfwidth = 0.0;       // 95% Student-t half-width over replications
};

ReplicatedResult simulate_replications(const SchemeSpec &scheme, std::int64_t horizon_slots,
                                       std::int64_t warmup_slots, std::uint64_t seed, int replications,
                                       const SimOptions &options = {}, int workers = 1);

/// 95% Student-t half-width of the mean of `values` (0 for fewer than two values).
double confidence_halfwidth(const std::vector<double> &values);

/// Sample moments of the reception trace, with batch-means standard errors.
struct EmpiricalMoments {
    MomentDecomposition moments;
    double var_alpha = 0, e_X = 0, e_X2 = 0, e_SX = 0;
    std::int64_t receptions = 0, pairs = 0;
    double lemma1_residual = 0, lemma1_stderr = 0;   // E[X^2] - E[Y^2] - 2 Var(alpha)
    double lemma2_residual = 0, lemma2_stderr = 0;   // E[S X] - E[S] E[Y] + Var(alpha)
    double e_K_stderr = 0;
};

/// Throws InsufficientSamplesError below 10^3 receptions, DomainError without a trace.
EmpiricalMoments empirical_moment_report(const SimResult &result);

} // namespace fsard
