#include "fsard/optimizer.hpp"

#include "fsard/analysis.hpp"
#include "fsard/combinatorics.hpp"
#include "fsard/error.hpp"
#include "fsard/simulator.hpp"
#include "parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace fsard {

namespace {

constexpr double kTieTolerance = 1e-9;

void check_grid(const std::vector<double> &grid, const char *name) {
    if (grid.empty()) throw DomainError(fmt::format("{} grid is empty", name));
    for (double v : grid)
        if (!(v > 0.0 && v <= 1.0)) throw ConfigError(name, fmt::format("grid value {} outside (0, 1]", v));
}

int resolve_workers(int requested) { return requested > 0 ? requested : default_workers(); }

bool better(const SearchPoint &a, const SearchPoint &b) {
    if (a.aaoi < b.aaoi - kTieTolerance) return true;
    if (b.aaoi < a.aaoi - kTieTolerance) return false;
    if (a.frame_size != b.frame_size) return a.frame_size < b.frame_size;
    return a.param < b.param;
}

/// Sorts the trace canonically and picks the best point.
void finish(OptimizationResult &result) {
    auto &trace = result.trace;
    std::sort(trace.begin(), trace.end(), [](const SearchPoint &a, const SearchPoint &b) {
        return a.frame_size != b.frame_size ? a.frame_size < b.frame_size : a.param < b.param;
    });
    const SearchPoint *best = nullptr;
    for (const auto &point : trace)
        if (std::isfinite(point.aaoi) && (!best || better(point, *best))) best = &point;
    if (!best) throw DomainError("no grid point has a finite AAoI");
    result.best_param = best->param;
    result.best_frame_size = best->frame_size;
    result.best_aaoi = best->aaoi;
    result.best_halfwidth = best->halfwidth;
}

std::vector<double> grid_with_lemma_point(const std::vector<double> &grid, double extra) {
    std::vector<double> out = grid;
    if (std::none_of(grid.begin(), grid.end(), [&](double g) { return g == extra; })) out.push_back(extra);
    return out;
}

OptimizationResult framed_grid_search(Scheme scheme, int users, int mini_slots, double rho,
                                      const std::vector<double> &gamma_grid, const GridSearchOptions &options) {
    check_grid(gamma_grid, "gamma");
    validate_frame_parameters(users, mini_slots, 2, rho);

    // Per-M gamma lists, then one flat task list so threads balance across M.
    std::vector<SearchPoint> tasks;
    for (int m = 2; m <= mini_slots + 1; ++m) {
        const auto grid = options.add_near_optimal
                              ? grid_with_lemma_point(gamma_grid, near_optimal_gamma(users, mini_slots, m, rho))
                              : gamma_grid;
        for (double g : grid) tasks.push_back({m, g, 0.0, 0.0});
    }

    const OccupancyTable table(mini_slots, users);
    detail::parallel_for(static_cast<int>(tasks.size()), resolve_workers(options.workers), [&](int i) {
        SearchPoint &point = tasks[static_cast<std::size_t>(i)];
        const ProtocolConfig config{users, point.frame_size, mini_slots, rho, point.param};
        point.aaoi = scheme == Scheme::fsa_rd ? aaoi_fsa_rd(config, table).aaoi : aaoi_fsa_rd_one(config, table).aaoi;
    });

    OptimizationResult result;
    result.scheme = scheme;
    result.trace = std::move(tasks);
    finish(result);
    return result;
}

} // namespace

int default_workers() {
    if (const char *env = std::getenv("FSARD_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception &) {
        }
        throw ConfigError("FSARD_WORKERS", fmt::format("expected a positive integer, got '{}'", env));
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<double> default_gamma_grid() {
    std::vector<double> grid;
    for (int k = 1; k <= 100; ++k) grid.push_back(k / 100.0);
    return grid;
}

OptimizationResult optimize_fsa_rd(int users, int mini_slots, double rho, const std::vector<double> &gamma_grid,
                                   const GridSearchOptions &options) {
    return framed_grid_search(Scheme::fsa_rd, users, mini_slots, rho, gamma_grid, options);
}

OptimizationResult optimize_fsa_rd_one_grid(int users, int mini_slots, double rho,
                                            const std::vector<double> &gamma_grid, const GridSearchOptions &options) {
    return framed_grid_search(Scheme::fsa_rd_one, users, mini_slots, rho, gamma_grid, options);
}

OptimizationResult optimize_fsa_rd_one(int users, int mini_slots, double rho) {
    validate_frame_parameters(users, mini_slots, 2, rho);
    const OccupancyTable table(mini_slots, users);
    OptimizationResult result;
    result.scheme = Scheme::fsa_rd_one;
    for (int m = 2; m <= mini_slots + 1; ++m) {
        const double gamma = near_optimal_gamma(users, mini_slots, m, rho);
        const ProtocolConfig config{users, m, mini_slots, rho, gamma};
        result.trace.push_back({m, gamma, aaoi_fsa_rd_one(config, table).aaoi, 0.0});
    }
    finish(result);
    return result;
}

OptimizationResult optimize_slotted_aloha(int users, double rho, const std::vector<double> &tau_grid,
                                          const AlohaSearchOptions &options) {
    check_grid(tau_grid, "tau");
    if (options.horizon_slots < 1'000'000) throw DomainError("simulation budget must be at least 10^6 slots");
    AlohaConfig{users, rho, 1.0}.validate();

    std::vector<double> taus = tau_grid;
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

    OptimizationResult result;
    result.scheme = Scheme::slotted_aloha;
    result.trace.resize(taus.size());

    // Grid points run in parallel; replications within a point stay sequential.
    detail::parallel_for(static_cast<int>(taus.size()), resolve_workers(options.workers), [&](int i) {
        const double tau = taus[static_cast<std::size_t>(i)];
        const auto runs = simulate_replications(SchemeSpec::slotted_aloha({users, rho, tau}), options.horizon_slots,
                                                options.warmup_slots, options.seed, options.replications);
        result.trace[static_cast<std::size_t>(i)] = {0, tau, runs.mean_aaoi, runs.ci_halfwidth};
    });
    finish(result);

    const auto best = std::find_if(result.trace.begin(), result.trace.end(),
                                   [&](const SearchPoint &p) { return p.param == result.best_param; });
    for (auto nb : {best - 1, best + 1}) {
        if (nb < result.trace.begin() || nb >= result.trace.end()) continue;
        if (std::abs(nb->aaoi - best->aaoi) <= nb->halfwidth + best->halfwidth) result.ambiguous = true;
    }
    if (result.ambiguous && !options.force)
        throw AmbiguousOptimumError(fmt::format(
            "optimum at tau={} (AAoI {:.4f} +- {:.4f}) is not separated from its neighbours; "
            "refine the grid, raise the budget, or force",
            best->param, best->aaoi, best->halfwidth));
    return result;
}

std::vector<double> default_tau_grid() {
    std::vector<double> grid;
    for (double tau = 0.002; tau < 1.0; tau *= 1.2) grid.push_back(std::round(tau * 1e6) / 1e6);
    grid.push_back(1.0);
    return grid;
}

OptimizationResult optimize_slotted_aloha_refined(int users, double rho, const AlohaSearchOptions &coarse,
                                                  const AlohaSearchOptions &fine, int fine_points) {
    if (fine_points < 2) throw DomainError("the fine stage needs at least two points");
    AlohaSearchOptions first = coarse;
    first.force = true;
    const auto grid = default_tau_grid();
    const OptimizationResult scan = optimize_slotted_aloha(users, rho, grid, first);

    const auto at = static_cast<std::size_t>(
        std::find(grid.begin(), grid.end(), scan.best_param) - grid.begin());
    const double lo = grid[at == 0 ? 0 : at - 1];
    const double hi = grid[std::min(at + 1, grid.size() - 1)];
    std::vector<double> refined;
    for (int k = 0; k < fine_points; ++k) {
        const double tau = lo * std::pow(hi / lo, static_cast<double>(k) / (fine_points - 1));
        refined.push_back(std::min(1.0, std::round(tau * 1e6) / 1e6));
    }
    return optimize_slotted_aloha(users, rho, refined, fine);
}

} // namespace fsard
