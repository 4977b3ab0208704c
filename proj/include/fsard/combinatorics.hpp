#pragma once

#include <span>
#include <vector>

namespace fsard {

/// Probability mass function over the counts 0..support_max().
///
/// Construction clamps summation noise: entries in (-1e-12, 0) become 0 and
/// entries in (1, 1+1e-12) become 1; anything further out is an internal error.
class CountPmf {
public:
    CountPmf() : mass_{1.0} {}
    explicit CountPmf(std::vector<double> mass);

    int support_max() const { return static_cast<int>(mass_.size()) - 1; }

    /// Zero outside the support.
    double operator[](int count) const {
        return (count < 0 || count > support_max()) ? 0.0 : mass_[static_cast<std::size_t>(count)];
    }

    std::span<const double> mass() const { return mass_; }
    double total() const;
    double mean() const;

private:
    std::vector<double> mass_;
};

/// Clamps a summed probability into [0,1]; throws std::logic_error beyond 1e-12 slack.
double clamp_probability(double value);

/// C(n,k) in floating point. Multiplicative for n <= 60, log-domain above.
double binomial_coefficient(int n, int k);
double log_binomial_coefficient(int n, int k);

/// Binomial(n, p) pmf over 0..n.
CountPmf binomial_pmf(int n, double p);

/// Number of reservers among `active` users that each reserve with probability gamma.
CountPmf reservation_count_pmf(int active, double gamma);

/// Number of mini-slots holding exactly one of `contenders` packets placed uniformly
/// over `mini_slots` mini-slots. Support 0..min(V, j).
CountPmf singleton_count_pmf(int contenders, int mini_slots);

/// Singleton count capped at the M-1 data slots: mass at M-1 collects every
/// outcome with at least M-1 singletons.
CountPmf capped_success_pmf(int contenders, int mini_slots, int frame_size);

/// Number of the `active` users that deliver an update in one frame.
CountPmf successful_update_pmf(int active, double gamma, int mini_slots, int frame_size);

/// Singleton-count pmfs for one mini-slot count and every contender count up to a bound.
///
/// Exact integer counting (multiprecision) is used whenever both dimensions are
/// at most 64; beyond that a nonnegative-term recursion in long double is used.
/// Both are free of the cancellation in the alternating-sum closed form.
class OccupancyTable {
public:
    enum class Method { automatic, exact, extended };

    OccupancyTable(int mini_slots, int max_contenders, Method method = Method::automatic);

    int mini_slots() const { return mini_slots_; }
    int max_contenders() const { return static_cast<int>(singletons_.size()) - 1; }

    const CountPmf &singletons(int contenders) const;
    CountPmf capped(int contenders, int frame_size) const;

private:
    int mini_slots_;
    std::vector<CountPmf> singletons_;
};

CountPmf successful_update_pmf(int active, double gamma, int frame_size, const OccupancyTable &table);

} // namespace fsard
