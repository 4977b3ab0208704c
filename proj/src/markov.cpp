#include "fsard/markov.hpp"

#include "fsard/error.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace fsard {

namespace {

constexpr double kResidualTolerance = 1e-10;
constexpr double kNegativeClamp = 1e-14;
constexpr int kPowerIterationBudget = 500000;

std::vector<std::vector<int>> strongly_connected_components(const StochasticMatrix &m, std::vector<int> &component_of) {
    const int n = m.size();
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    std::vector<char> seen(static_cast<std::size_t>(n), 0);

    // Kosaraju, first pass: finishing order on the forward graph.
    for (int root = 0; root < n; ++root) {
        if (seen[static_cast<std::size_t>(root)]) continue;
        std::vector<std::pair<int, int>> stack{{root, 0}};
        seen[static_cast<std::size_t>(root)] = 1;
        while (!stack.empty()) {
            auto &[node, next] = stack.back();
            if (next < n) {
                const int j = next++;
                if (m(node, j) > 0.0 && !seen[static_cast<std::size_t>(j)]) {
                    seen[static_cast<std::size_t>(j)] = 1;
                    stack.emplace_back(j, 0);
                }
            } else {
                order.push_back(node);
                stack.pop_back();
            }
        }
    }

    // Second pass on the transposed graph.
    component_of.assign(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<int>> components;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (component_of[static_cast<std::size_t>(*it)] >= 0) continue;
        const int id = static_cast<int>(components.size());
        components.emplace_back();
        std::vector<int> stack{*it};
        component_of[static_cast<std::size_t>(*it)] = id;
        while (!stack.empty()) {
            const int node = stack.back();
            stack.pop_back();
            components.back().push_back(node);
            for (int i = 0; i < n; ++i) {
                if (m(i, node) > 0.0 && component_of[static_cast<std::size_t>(i)] < 0) {
                    component_of[static_cast<std::size_t>(i)] = id;
                    stack.push_back(i);
                }
            }
        }
    }
    return components;
}

std::vector<double> solve_direct(const StochasticMatrix &m) {
    const int n = m.size();
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(j, i) = m(i, j) - (i == j ? 1.0 : 0.0);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    const Eigen::VectorXd x = a.partialPivLu().solve(b);
    return {x.data(), x.data() + n};
}

std::vector<double> solve_power(const StochasticMatrix &m) {
    const int n = m.size();
    std::vector<double> x(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<double> next(static_cast<std::size_t>(n));
    for (int iter = 0; iter < kPowerIterationBudget; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const double xi = x[static_cast<std::size_t>(i)];
            if (xi == 0.0) continue;
            const auto row = m.row(i);
            for (int j = 0; j < n; ++j) next[static_cast<std::size_t>(j)] += xi * row[static_cast<std::size_t>(j)];
        }
        double change = 0.0;
        for (int j = 0; j < n; ++j) {
            // Lazy chain (P+I)/2 removes periodicity without moving the fixed point.
            const double lazy = 0.5 * (x[static_cast<std::size_t>(j)] + next[static_cast<std::size_t>(j)]);
            change = std::max(change, std::abs(next[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)]));
            next[static_cast<std::size_t>(j)] = lazy;
        }
        x.swap(next);
        if (change < 1e-14) break;
    }
    return x;
}

void tidy(std::vector<double> &pi) {
    for (double &v : pi) {
        if (v < 0.0) {
            if (v < -1e-12) throw NonConvergenceError("stationary solve produced a negative probability");
            v = 0.0;
        }
    }
    double sum = 0.0;
    for (double v : pi) sum += v;
    for (double &v : pi) v /= sum;
}

} // namespace

StochasticMatrix::StochasticMatrix(int states) : states_(states) {
    if (states < 1) throw DomainError("a stochastic matrix needs at least one state");
    entries_.assign(static_cast<std::size_t>(states) * static_cast<std::size_t>(states), 0.0);
}

double StochasticMatrix::max_row_deviation() const {
    double worst = 0.0;
    for (int i = 0; i < states_; ++i) {
        long double sum = 0.0L;
        for (double v : row(i)) sum += v;
        worst = std::max(worst, static_cast<double>(std::abs(sum - 1.0L)));
    }
    return worst;
}

StochasticMatrix build_transition_matrix(const ProtocolConfig &config) {
    config.validate();
    return build_transition_matrix(config, OccupancyTable(config.mini_slots, config.users));
}

StochasticMatrix build_transition_matrix(const ProtocolConfig &config, const OccupancyTable &table) {
    config.validate();
    const int n_users = config.users;
    if (table.mini_slots() != config.mini_slots || table.max_contenders() < n_users)
        throw DomainError("occupancy table does not cover the configuration");

    const double p = config.arrival_prob();
    std::vector<CountPmf> arrivals;
    arrivals.reserve(static_cast<std::size_t>(n_users + 1));
    for (int n = 0; n <= n_users; ++n) arrivals.push_back(binomial_pmf(n, p));

    std::vector<CountPmf> winners;
    winners.reserve(static_cast<std::size_t>(n_users + 1));
    for (int j = 0; j <= n_users; ++j) winners.push_back(table.capped(j, config.frame_size));

    StochasticMatrix matrix(n_users + 1);
    const int cap = config.data_slots();
    std::vector<long double> delivered;
    for (int i = 0; i <= n_users; ++i) {
        // Distribution of deliveries among i active users (reservation thinning, then capped singletons).
        const CountPmf reservers = binomial_pmf(i, config.gamma);
        delivered.assign(static_cast<std::size_t>(std::min(i, cap) + 1), 0.0L);
        for (int j = 0; j <= i; ++j) {
            const double w = reservers[j];
            if (w == 0.0) continue;
            const CountPmf &won = winners[static_cast<std::size_t>(j)];
            for (int s = 0; s <= won.support_max(); ++s)
                delivered[static_cast<std::size_t>(s)] += static_cast<long double>(w) * won[s];
        }

        for (int j = 0; j <= n_users; ++j) {
            long double sum = 0.0L;
            for (int s = std::max(0, i - j); s <= std::min(i, cap); ++s) {
                const CountPmf &fresh = arrivals[static_cast<std::size_t>(n_users - i + s)];
                sum += delivered[static_cast<std::size_t>(s)] * fresh[j - i + s];
            }
            double value = static_cast<double>(sum);
            if (value < 0.0 && value > -kNegativeClamp) value = 0.0;
            matrix(i, j) = value;
        }
    }
    return matrix;
}

double stationarity_residual(const StochasticMatrix &matrix, std::span<const double> pi) {
    const int n = matrix.size();
    if (static_cast<int>(pi.size()) != n) throw DomainError("distribution length does not match the matrix");
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        long double acc = 0.0L;
        for (int i = 0; i < n; ++i) acc += static_cast<long double>(pi[static_cast<std::size_t>(i)]) * matrix(i, j);
        worst = std::max(worst, static_cast<double>(std::abs(acc - pi[static_cast<std::size_t>(j)])));
    }
    return worst;
}

int closed_class_count(const StochasticMatrix &matrix) {
    std::vector<int> component_of;
    const auto components = strongly_connected_components(matrix, component_of);
    int closed = 0;
    for (std::size_t c = 0; c < components.size(); ++c) {
        bool leaks = false;
        for (int i : components[c]) {
            for (int j = 0; j < matrix.size() && !leaks; ++j)
                leaks = matrix(i, j) > 0.0 && component_of[static_cast<std::size_t>(j)] != static_cast<int>(c);
            if (leaks) break;
        }
        if (!leaks) ++closed;
    }
    return closed;
}

SteadyState steady_state(const StochasticMatrix &matrix, SteadyStateSolver solver) {
    if (matrix.max_row_deviation() > 1e-9) throw DomainError("matrix is not row-stochastic");
    const int closed = closed_class_count(matrix);
    if (closed != 1)
        throw DegenerateChainError(fmt::format("chain has {} closed communicating classes", closed));

    SteadyState result;
    if (solver == SteadyStateSolver::direct) {
        result.pi = solve_direct(matrix);
        tidy(result.pi);
        result.residual = stationarity_residual(matrix, result.pi);
        if (result.residual <= kResidualTolerance) return result;
    }
    result.pi = solve_power(matrix);
    tidy(result.pi);
    result.residual = stationarity_residual(matrix, result.pi);
    if (result.residual > kResidualTolerance)
        throw NonConvergenceError(fmt::format("stationary residual {:.3e} above tolerance", result.residual));
    return result;
}

void write_matrix_csv(std::ostream &out, const StochasticMatrix &matrix) {
    out << "state";
    for (int j = 0; j < matrix.size(); ++j) out << ",p" << j;
    out << '\n';
    for (int i = 0; i < matrix.size(); ++i) {
        out << i;
        for (double v : matrix.row(i)) out << fmt::format(",{:.10g}", v);
        out << '\n';
    }
}

void write_steady_state_csv(std::ostream &out, const SteadyState &state) {
    out << "state,pi\n";
    for (std::size_t i = 0; i < state.pi.size(); ++i) out << fmt::format("{},{:.10g}\n", i, state.pi[i]);
}

} // namespace fsard
