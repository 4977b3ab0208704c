#pragma once

#include "fsard/combinatorics.hpp"
#include "fsard/config.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace fsard {

/// Dense row-stochastic matrix; entry (i, j) is Pr(next = j | current = i).
class StochasticMatrix {
public:
    explicit StochasticMatrix(int states);

    int size() const { return states_; }

    double operator()(int i, int j) const { return entries_[index(i, j)]; }
    double &operator()(int i, int j) { return entries_[index(i, j)]; }

    std::span<const double> row(int i) const {
        return {entries_.data() + index(i, 0), static_cast<std::size_t>(states_)};
    }

    /// max_i |sum_j P(i,j) - 1|
    double max_row_deviation() const;

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(states_) + static_cast<std::size_t>(j);
    }

    int states_;
    std::vector<double> entries_;
};

struct SteadyState {
    std::vector<double> pi;
    double residual = 0.0; // ||pi P - pi||_inf
};

enum class SteadyStateSolver { direct, power_iteration };

/// Frame-boundary chain of the number of active users under FSA-RD (states 0..N).
StochasticMatrix build_transition_matrix(const ProtocolConfig &config);
StochasticMatrix build_transition_matrix(const ProtocolConfig &config, const OccupancyTable &table);

/// Stationary law of an ergodic (single closed class) chain.
///
/// The direct solver replaces one balance equation with the normalisation and
/// falls back to power iteration if its residual misses 1e-10. Throws
/// DegenerateChainError on several closed classes and NonConvergenceError when
/// the residual tolerance cannot be reached.
SteadyState steady_state(const StochasticMatrix &matrix, SteadyStateSolver solver = SteadyStateSolver::direct);

double stationarity_residual(const StochasticMatrix &matrix, std::span<const double> pi);

/// Number of closed communicating classes of the support graph.
int closed_class_count(const StochasticMatrix &matrix);

/// Debug dumps: one row per state, `state,p0,p1,...` and `state,pi`.
void write_matrix_csv(std::ostream &out, const StochasticMatrix &matrix);
void write_steady_state_csv(std::ostream &out, const SteadyState &state);

} // namespace fsard
