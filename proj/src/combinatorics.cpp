#include "fsard/combinatorics.hpp"

#include "fsard/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fsard {

namespace {

constexpr double kClampSlack = 1e-12;
constexpr double kPmfSumTolerance = 1e-10;
constexpr int kMultiplicativeLimit = 60;
constexpr int kExactLimit = 64;

using BigInt = boost::multiprecision::cpp_int;

double to_double_ratio(const BigInt &num, const BigInt &den) {
    return static_cast<double>(num.convert_to<long double>() / den.convert_to<long double>());
}

std::vector<CountPmf> exact_singleton_table(int mini_slots, int max_contenders) {
    const int v = mini_slots;
    const int jmax = max_contenders;
    const int nmax = std::max(jmax, v);

    std::vector<std::vector<BigInt>> choose(static_cast<std::size_t>(nmax + 1));
    for (int n = 0; n <= nmax; ++n) {
        auto &row = choose[static_cast<std::size_t>(n)];
        row.assign(static_cast<std::size_t>(n + 1), BigInt(1));
        for (int k = 1; k < n; ++k)
            row[static_cast<std::size_t>(k)] =
                choose[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k - 1)] +
                choose[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k)];
    }

    // no_single[b][n]: placements of n labelled packets into b mini-slots with no singleton.
    std::vector<std::vector<BigInt>> no_single(static_cast<std::size_t>(v + 1),
                                               std::vector<BigInt>(static_cast<std::size_t>(jmax + 1)));
    no_single[0][0] = 1;
    for (int b = 1; b <= v; ++b) {
        for (int n = 0; n <= jmax; ++n) {
            BigInt acc = 0;
            for (int k = 0; k <= n; ++k) {
                if (k == 1) continue;
                const auto &rest = no_single[static_cast<std::size_t>(b - 1)][static_cast<std::size_t>(n - k)];
                if (rest != 0) acc += choose[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] * rest;
            }
            no_single[static_cast<std::size_t>(b)][static_cast<std::size_t>(n)] = std::move(acc);
        }
    }

    std::vector<CountPmf> table;
    table.reserve(static_cast<std::size_t>(jmax + 1));
    for (int j = 0; j <= jmax; ++j) {
        const int smax = std::min(v, j);
        const BigInt total = boost::multiprecision::pow(BigInt(v), static_cast<unsigned>(j));
        std::vector<double> mass(static_cast<std::size_t>(smax + 1), 0.0);
        BigInt falling = 1; // j (j-1) ... (j-s+1)
        for (int s = 0; s <= smax; ++s) {
            if (s > 0) falling *= (j - s + 1);
            const auto &rest = no_single[static_cast<std::size_t>(v - s)][static_cast<std::size_t>(j - s)];
            if (rest == 0) continue;
            BigInt ways = choose[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)] * falling * rest;
            mass[static_cast<std::size_t>(s)] = to_double_ratio(ways, total);
        }
        table.emplace_back(std::move(mass));
    }
    return table;
}

std::vector<CountPmf> extended_singleton_table(int mini_slots, int max_contenders) {
    const int v = mini_slots;
    const int jmax = max_contenders;

    std::vector<long double> log_fact(static_cast<std::size_t>(jmax + 1), 0.0L);
    for (int n = 1; n <= jmax; ++n)
        log_fact[static_cast<std::size_t>(n)] = log_fact[static_cast<std::size_t>(n - 1)] + std::log(static_cast<long double>(n));

    // no_single[b][n]: probability that n packets thrown uniformly into b mini-slots leave no singleton.
    std::vector<std::vector<long double>> no_single(static_cast<std::size_t>(v + 1),
                                                    std::vector<long double>(static_cast<std::size_t>(jmax + 1), 0.0L));
    no_single[0][0] = 1.0L;
    for (int b = 1; b <= v; ++b) {
        const long double log_in = -std::log(static_cast<long double>(b));
        const long double log_out = b == 1 ? 0.0L : std::log1p(-1.0L / b);
        auto &cur = no_single[static_cast<std::size_t>(b)];
        const auto &prev = no_single[static_cast<std::size_t>(b - 1)];
        for (int n = 0; n <= jmax; ++n) {
            long double acc = 0.0L;
            for (int k = 0; k <= n; ++k) {
                if (k == 1) continue;
                const long double rest = prev[static_cast<std::size_t>(n - k)];
                if (rest == 0.0L) continue;
                if (b == 1 && k != n) continue;
                const long double log_term = log_fact[static_cast<std::size_t>(n)] - log_fact[static_cast<std::size_t>(k)] -
                                             log_fact[static_cast<std::size_t>(n - k)] + k * log_in +
                                             (n - k) * log_out;
                acc += std::exp(log_term) * rest;
            }
            cur[static_cast<std::size_t>(n)] = acc;
        }
    }

    std::vector<CountPmf> table;
    table.reserve(static_cast<std::size_t>(jmax + 1));
    const long double log_v = std::log(static_cast<long double>(v));
    for (int j = 0; j <= jmax; ++j) {
        const int smax = std::min(v, j);
        std::vector<double> mass(static_cast<std::size_t>(smax + 1), 0.0);
        for (int s = 0; s <= smax; ++s) {
            const long double rest = no_single[static_cast<std::size_t>(v - s)][static_cast<std::size_t>(j - s)];
            if (rest == 0.0L) continue;
            const long double log_spread =
                (j - s) == 0 ? 0.0L : (j - s) * std::log(static_cast<long double>(v - s));
            const long double log_weight = static_cast<long double>(log_binomial_coefficient(v, s)) +
                                           log_fact[static_cast<std::size_t>(j)] -
                                           log_fact[static_cast<std::size_t>(j - s)] + log_spread - j * log_v;
            mass[static_cast<std::size_t>(s)] = static_cast<double>(std::exp(log_weight) * rest);
        }
        table.emplace_back(std::move(mass));
    }
    return table;
}

void require_probability(double p, const char *name) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

} // namespace

double clamp_probability(double value) {
    if (value < 0.0) {
        if (value > -kClampSlack) return 0.0;
        throw std::logic_error("probability underflow below clamp slack: " + std::to_string(value));
    }
    if (value > 1.0) {
        if (value < 1.0 + kClampSlack) return 1.0;
        throw std::logic_error("probability exceeds one beyond clamp slack: " + std::to_string(value));
    }
    return value;
}

CountPmf::CountPmf(std::vector<double> mass) : mass_(std::move(mass)) {
    if (mass_.empty()) throw DomainError("a count pmf needs at least one entry");
    for (double &m : mass_) m = clamp_probability(m);
    const double sum = total();
    if (std::abs(sum - 1.0) > kPmfSumTolerance)
        throw std::logic_error("count pmf does not sum to one (sum=" + std::to_string(sum) + ")");
}

double CountPmf::total() const { return std::accumulate(mass_.begin(), mass_.end(), 0.0); }

double CountPmf::mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < mass_.size(); ++k) m += static_cast<double>(k) * mass_[k];
    return m;
}

double log_binomial_coefficient(int n, int k) {
    if (k < 0 || k > n) return -INFINITY;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial_coefficient(int n, int k) {
    if (n < 0) throw DomainError("binomial coefficient needs n >= 0");
    if (k < 0 || k > n) return 0.0;
    if (n > kMultiplicativeLimit) return std::exp(log_binomial_coefficient(n, k));
    k = std::min(k, n - k);
    double result = 1.0;
    for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return std::round(result);
}

CountPmf binomial_pmf(int n, double p) {
    if (n < 0) throw DomainError("binomial pmf needs n >= 0");
    require_probability(p, "binomial success probability");
    std::vector<double> mass(static_cast<std::size_t>(n + 1), 0.0);
    if (p == 0.0) {
        mass.front() = 1.0;
    } else if (p == 1.0) {
        mass.back() = 1.0;
    } else if (n <= kMultiplicativeLimit) {
        for (int k = 0; k <= n; ++k)
            mass[static_cast<std::size_t>(k)] = binomial_coefficient(n, k) * std::pow(p, k) * std::pow(1.0 - p, n - k);
    } else {
        const double log_p = std::log(p);
        const double log_q = std::log1p(-p);
        for (int k = 0; k <= n; ++k)
            mass[static_cast<std::size_t>(k)] = std::exp(log_binomial_coefficient(n, k) + k * log_p + (n - k) * log_q);
    }
    return CountPmf(std::move(mass));
}

CountPmf reservation_count_pmf(int active, double gamma) {
    if (active < 0) throw DomainError("number of active users must be >= 0");
    require_probability(gamma, "gamma");
    return binomial_pmf(active, gamma);
}

OccupancyTable::OccupancyTable(int mini_slots, int max_contenders, Method method) : mini_slots_(mini_slots) {
    if (mini_slots < 1) throw DomainError("number of mini-slots must be >= 1");
    if (max_contenders < 0) throw DomainError("number of contenders must be >= 0");
    const bool small = mini_slots <= kExactLimit && max_contenders <= kExactLimit;
    const bool exact = method == Method::exact || (method == Method::automatic && small);
    singletons_ = exact ? exact_singleton_table(mini_slots, max_contenders)
                        : extended_singleton_table(mini_slots, max_contenders);
}

const CountPmf &OccupancyTable::singletons(int contenders) const {
    if (contenders < 0 || contenders > max_contenders())
        throw DomainError("contender count " + std::to_string(contenders) + " outside the occupancy table");
    return singletons_[static_cast<std::size_t>(contenders)];
}

CountPmf OccupancyTable::capped(int contenders, int frame_size) const {
    if (frame_size < 2 || frame_size > mini_slots_ + 1) throw DomainError("M must lie in 2..V+1");
    const CountPmf &raw = singletons(contenders);
    const int cap = frame_size - 1;
    const int smax = std::min(cap, raw.support_max());
    std::vector<double> mass(static_cast<std::size_t>(smax + 1), 0.0);
    for (int s = 0; s <= raw.support_max(); ++s) mass[static_cast<std::size_t>(std::min(s, cap))] += raw[s];
    return CountPmf(std::move(mass));
}

CountPmf singleton_count_pmf(int contenders, int mini_slots) {
    if (contenders < 0) throw DomainError("number of contenders must be >= 0");
    if (mini_slots < 1) throw DomainError("number of mini-slots must be >= 1");
    return OccupancyTable(mini_slots, contenders).singletons(contenders);
}

CountPmf capped_success_pmf(int contenders, int mini_slots, int frame_size) {
    if (contenders < 0) throw DomainError("number of contenders must be >= 0");
    if (mini_slots < 1) throw DomainError("number of mini-slots must be >= 1");
    return OccupancyTable(mini_slots, contenders).capped(contenders, frame_size);
}

CountPmf successful_update_pmf(int active, double gamma, int frame_size, const OccupancyTable &table) {
    if (active < 0) throw DomainError("number of active users must be >= 0");
    if (frame_size < 2 || frame_size > table.mini_slots() + 1) throw DomainError("M must lie in 2..V+1");
    const CountPmf reservers = reservation_count_pmf(active, gamma);
    const int smax = std::min(active, frame_size - 1);
    std::vector<long double> acc(static_cast<std::size_t>(smax + 1), 0.0L);
    for (int j = 0; j <= active; ++j) {
        const double weight = reservers[j];
        if (weight == 0.0) continue;
        const CountPmf winners = table.capped(j, frame_size);
        for (int s = 0; s <= winners.support_max(); ++s)
            acc[static_cast<std::size_t>(s)] += static_cast<long double>(weight) * winners[s];
    }
    return CountPmf(std::vector<double>(acc.begin(), acc.end()));
}

CountPmf successful_update_pmf(int active, double gamma, int mini_slots, int frame_size) {
    if (active < 0) throw DomainError("number of active users must be >= 0");
    if (mini_slots < 1) throw DomainError("number of mini-slots must be >= 1");
    return successful_update_pmf(active, gamma, frame_size, OccupancyTable(mini_slots, active));
}

} // namespace fsard
