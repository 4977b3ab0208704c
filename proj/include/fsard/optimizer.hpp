#pragma once

#include "fsard/config.hpp"

#include <cstdint>
#include <vector>

namespace fsard {

/// One evaluated grid point. `param` is gamma for framed schemes, tau for slotted ALOHA
/// (frame_size is 0 there).
struct SearchPoint {
    int frame_size = 0;
    double param = 0.0;
    double aaoi = 0.0;
    double halfwidth = 0.0;   // simulation-based searches only
};

struct OptimizationResult {
    Scheme scheme = Scheme::fsa_rd;
    double best_param = 0.0;
    int best_frame_size = 0;
    double best_aaoi = 0.0;
    double best_halfwidth = 0.0;
    std::vector<SearchPoint> trace;   // sorted by (frame_size, param)
    bool ambiguous = false;           // neighbours of the optimum overlap within half-widths
};

/// Worker threads for grid fan-out: FSARD_WORKERS if set, else the hardware concurrency.
int default_workers();

/// 0.01, 0.02, ..., 1.00
std::vector<double> default_gamma_grid();

struct GridSearchOptions {
    bool add_near_optimal = false;   // also evaluate near_optimal_gamma for each M
    int workers = 0;                 // 0 = default_workers()
};

/// Exhaustive search of aaoi_fsa_rd over gamma_grid x {2..V+1}. Ties within 1e-9 go
/// to the smaller M, then the smaller gamma.
OptimizationResult optimize_fsa_rd(int users, int mini_slots, double rho, const std::vector<double> &gamma_grid,
                                   const GridSearchOptions &options = {});

/// For each M in 2..V+1 evaluate FSA-RD-One at gamma = near_optimal_gamma(N, V, M, rho).
OptimizationResult optimize_fsa_rd_one(int users, int mini_slots, double rho);

/// Exhaustive FSA-RD-One search, the reference for the near-optimal rule.
OptimizationResult optimize_fsa_rd_one_grid(int users, int mini_slots, double rho,
                                            const std::vector<double> &gamma_grid,
                                            const GridSearchOptions &options = {});

struct AlohaSearchOptions {
    std::int64_t horizon_slots = 10'000'000;   // at least 10^6
    std::int64_t warmup_slots = 10'000;
    int replications = 3;
    std::uint64_t seed = 1;
    bool force = false;   // report the best point even when it is not separated from its neighbours
    int workers = 0;
};

/// Minimizes the replication-averaged simulated AAoI over tau_grid. Every grid point
/// uses the same replication seeds. Throws AmbiguousOptimumError when a neighbouring
/// grid point's confidence interval overlaps the best one, unless options.force.
OptimizationResult optimize_slotted_aloha(int users, double rho, const std::vector<double> &tau_grid,
                                          const AlohaSearchOptions &options = {});

/// Geometric tau grid 0.002 * 1.2^k up to 1, with 1 included.
std::vector<double> default_tau_grid();

/// Two-stage tau search: a forced pass over default_tau_grid() with `coarse`, then
/// `fine_points` geometrically spaced values between the coarse optimum's neighbours
/// with `fine`. The result describes the fine stage only.
OptimizationResult optimize_slotted_aloha_refined(int users, double rho, const AlohaSearchOptions &coarse,
                                                  const AlohaSearchOptions &fine, int fine_points = 11);

} // namespace fsard
