#include "fsard/simulator.hpp"

#include "fsard/error.hpp"
#include "fsard/rng.hpp"
#include "parallel.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>

namespace fsard {

namespace {

constexpr std::int64_t kMaxHorizon = std::int64_t{1} << 50;
constexpr std::int64_t kMinMomentSamples = 1000;

/// Time-integrated AoI of one user over the slot window [lo, hi).
class AgeMeter {
public:
    /// Age is `age` from slot `slot` onwards (until the next reset).
    void reset(std::int64_t slot, std::int64_t age, std::int64_t lo, std::int64_t hi) {
        accumulate(slot, lo, hi);
        anchor_slot_ = slot;
        anchor_age_ = age;
    }

    void finish(std::int64_t lo, std::int64_t hi) { accumulate(hi, lo, hi); }

    long double area() const { return static_cast<long double>(area_); }

private:
    void accumulate(std::int64_t until, std::int64_t lo, std::int64_t hi) {
        const std::int64_t a = std::max(anchor_slot_, lo);
        const std::int64_t b = std::min(until, hi);
        if (b <= a) return;
        const __int128 count = b - a;
        const __int128 first = anchor_age_ + (a - anchor_slot_);
        const __int128 last = anchor_age_ + (b - 1 - anchor_slot_);
        area_ += (first + last) * count / 2;
    }

    std::int64_t anchor_slot_ = 0;
    std::int64_t anchor_age_ = 1;
    __int128 area_ = 0;
};

void validate_horizon(std::int64_t horizon, std::int64_t warmup) {
    if (warmup < 0) throw DomainError("warmup must be non-negative");
    if (horizon <= warmup) throw DomainError("horizon must exceed warmup");
    if (horizon > kMaxHorizon) throw DomainError("horizon exceeds the slot counter range");
}

void finalize_ages(SimResult &result, std::vector<AgeMeter> &ages) {
    const std::int64_t lo = result.warmup_slots;
    const std::int64_t hi = result.horizon_slots;
    const long double window = static_cast<long double>(hi - lo);
    result.per_user_aaoi.clear();
    long double total = 0.0L;
    for (auto &age : ages) {
        age.finish(lo, hi);
        const long double per_user = age.area() / window;
        result.per_user_aaoi.push_back(static_cast<double>(per_user));
        total += static_cast<long double>(result.per_user_aaoi.back());
    }
    result.network_aaoi = static_cast<double>(total / static_cast<long double>(ages.size()));
}

struct FramedUser {
    std::int64_t next_generation = 0;
    std::int64_t pending_generation = -1;   // freshest update generated in the current frame
    std::int64_t packet_generation = -1;    // update eligible for transmission, -1 if none
    std::int64_t packet_frame = -1;         // frame in which that update became eligible
    std::int64_t available_frame = -1;      // first frame with an update since the last delivery
    std::int64_t last_rx_slot = -1;
    std::int64_t last_rx_frame = -1;
    std::int64_t last_service = 0;
};

class TraceRecorder {
public:
    TraceRecorder(const SimOptions &options, std::int64_t warmup, std::int64_t horizon)
        : out_(options.trace_csv), warmup_(warmup), window_(horizon - warmup) {
        summary_.batches.resize(static_cast<std::size_t>(std::max(1, options.batches)));
        if (out_) *out_ << "reception_index,t_prime,generation_slot,S,X,Y,W,K,alpha,l,Z,user\n";
    }

    void record(int user, std::int64_t t_prime, std::int64_t generation, std::int64_t service, std::int64_t alpha,
                std::int64_t l, std::int64_t z, const FramedUser *previous, std::int64_t m) {
        const auto nb = static_cast<std::int64_t>(summary_.batches.size());
        const auto b = static_cast<std::size_t>(std::min(nb - 1, (t_prime - warmup_) * nb / window_));
        ReceptionSums sample;
        sample.receptions = 1;
        sample.s = static_cast<double>(service);
        sample.s2 = sample.s * sample.s;
        sample.l = static_cast<double>(l);
        sample.z = static_cast<double>(z);
        sample.alpha = static_cast<double>(alpha);
        sample.alpha2 = sample.alpha * sample.alpha;
        std::int64_t x = 0, y = 0, w = 0, k = 0;
        if (previous) {
            x = t_prime - previous->last_rx_slot;
            const std::int64_t frame = t_prime / m;
            y = (frame - previous->last_rx_frame) * m;
            w = (previous->available_frame - (previous->last_rx_frame + 1)) * m;
            k = (frame + 1 - previous->available_frame) * m;
            sample.pairs = 1;
            sample.x = static_cast<double>(x);
            sample.x2 = sample.x * sample.x;
            sample.y = static_cast<double>(y);
            sample.y2 = sample.y * sample.y;
            sample.w = static_cast<double>(w);
            sample.w2 = sample.w * sample.w;
            sample.k = static_cast<double>(k);
            sample.k2 = sample.k * sample.k;
            sample.sx = static_cast<double>(previous->last_service) * sample.x;
        }
        summary_.total.merge(sample);
        summary_.batches[b].merge(sample);
        if (out_) {
            *out_ << index_++ << ',' << t_prime << ',' << generation << ',' << service << ',';
            if (previous)
                *out_ << x << ',' << y << ',' << w << ',' << k;
            else
                *out_ << ",,,";
            *out_ << ',' << alpha << ',' << l << ',' << z << ',' << user << '\n';
        }
    }

    TraceSummary take() { return std::move(summary_); }

private:
    std::ostream *out_;
    std::int64_t warmup_;
    std::int64_t window_;
    std::int64_t index_ = 0;
    TraceSummary summary_;
};

SimResult simulate_framed(const SchemeSpec &scheme, std::int64_t horizon, std::int64_t warmup, std::uint64_t seed,
                          const SimOptions &options) {
    const ProtocolConfig &cfg = scheme.protocol();
    const bool one_shot = scheme.kind() == Scheme::fsa_rd_one;
    const int n_users = cfg.users;
    const std::int64_t m = cfg.frame_size;
    const int data_slots = cfg.data_slots();

    Rng rng(seed);
    std::vector<FramedUser> users(static_cast<std::size_t>(n_users));
    std::vector<AgeMeter> ages(static_cast<std::size_t>(n_users));
    for (auto &u : users) u.next_generation = rng.geometric(cfg.rho) - 1;

    const bool tracing = options.record_trace || options.trace_csv != nullptr;
    std::optional<TraceRecorder> recorder;
    if (tracing) recorder.emplace(options, warmup, horizon);

    FrameStats frames;
    if (options.record_frames) {
        frames.active_histogram.assign(static_cast<std::size_t>(n_users + 1), 0);
        frames.transitions.assign(static_cast<std::size_t>(n_users + 1) * static_cast<std::size_t>(n_users + 1), 0);
    }
    int previous_active = -1;

    std::vector<int> occupancy(static_cast<std::size_t>(cfg.mini_slots));
    std::vector<int> owner(static_cast<std::size_t>(cfg.mini_slots));
    std::vector<int> winners;
    winners.reserve(static_cast<std::size_t>(data_slots));

    SimResult result;
    result.scheme = scheme;
    result.horizon_slots = horizon;
    result.warmup_slots = warmup;
    result.seed = seed;

    for (std::int64_t frame = 0;; ++frame) {
        const std::int64_t start = frame * m;
        if (start >= horizon) break;
        const bool counted_frame = start >= warmup;

        // Updates generated during the previous frame become eligible now.
        int active = 0;
        for (auto &u : users) {
            if (u.pending_generation >= 0) {
                u.packet_generation = u.pending_generation;
                u.packet_frame = frame;
                u.pending_generation = -1;
            }
            if (u.packet_generation >= 0) {
                ++active;
                if (u.available_frame < 0) u.available_frame = frame;
            }
        }
        if (options.record_frames && counted_frame) {
            ++frames.frames;
            ++frames.active_histogram[static_cast<std::size_t>(active)];
            if (previous_active >= 0)
                ++frames.transitions[static_cast<std::size_t>(previous_active) * static_cast<std::size_t>(n_users + 1) +
                                     static_cast<std::size_t>(active)];
            previous_active = active;
        }

        // Reservation slot: uniform mini-slot choice, singletons win in mini-slot order.
        std::fill(occupancy.begin(), occupancy.end(), 0);
        int reservations = 0;
        for (int n = 0; n < n_users; ++n) {
            if (users[static_cast<std::size_t>(n)].packet_generation < 0) continue;
            if (!rng.bernoulli(cfg.gamma)) continue;
            const auto slot = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(cfg.mini_slots)));
            ++occupancy[slot];
            owner[slot] = n;
            ++reservations;
        }
        winners.clear();
        for (std::size_t v = 0; v < occupancy.size() && static_cast<int>(winners.size()) < data_slots; ++v)
            if (occupancy[v] == 1) winners.push_back(owner[v]);
        if (options.record_frames && counted_frame) {
            frames.reservations += reservations;
            frames.reservation_wins += static_cast<std::int64_t>(winners.size());
        }

        // Generation at slot starts within this frame; the freshest one is kept.
        const std::int64_t end = start + m;
        for (auto &u : users) {
            while (u.next_generation < end) {
                u.pending_generation = u.next_generation;
                u.next_generation += rng.geometric(cfg.rho);
            }
        }

        // Data slots: winner d transmits in frame slot d+1 and is received at its end.
        for (std::size_t d = 0; d < winners.size(); ++d) {
            const int n = winners[d];
            FramedUser &u = users[static_cast<std::size_t>(n)];
            const std::int64_t offset = static_cast<std::int64_t>(d) + 1;
            const std::int64_t t_rx = start + offset;
            const std::int64_t service = t_rx + 1 - u.packet_generation;
            ages[static_cast<std::size_t>(n)].reset(t_rx + 1, service, warmup, horizon);

            if (t_rx >= warmup && t_rx < horizon) {
                ++result.reception_count;
                if (recorder) {
                    const std::int64_t l = u.packet_frame * m - u.packet_generation;
                    const std::int64_t z = (frame - u.packet_frame + 1) * m;
                    recorder->record(n, t_rx, u.packet_generation, service, offset + 1, l, z,
                                     u.last_rx_frame >= 0 ? &u : nullptr, m);
                }
            }
            u.last_rx_slot = t_rx;
            u.last_rx_frame = frame;
            u.last_service = service;
            u.available_frame = -1;
            u.packet_generation = -1;
            u.packet_frame = -1;
        }

        if (one_shot) {
            for (auto &u : users) {
                u.packet_generation = -1;
                u.packet_frame = -1;
            }
        }
    }

    finalize_ages(result, ages);
    if (recorder) result.trace = recorder->take();
    if (options.record_frames) result.frames = std::move(frames);
    return result;
}

} // namespace

void ReceptionSums::merge(const ReceptionSums &o) {
    receptions += o.receptions;
    s += o.s;
    s2 += o.s2;
    l += o.l;
    z += o.z;
    alpha += o.alpha;
    alpha2 += o.alpha2;
    pairs += o.pairs;
    x += o.x;
    x2 += o.x2;
    y += o.y;
    y2 += o.y2;
    w += o.w;
    w2 += o.w2;
    k += o.k;
    k2 += o.k2;
    sx += o.sx;
}

std::int64_t FrameStats::transition(int from, int to) const {
    const auto n = static_cast<std::size_t>(active_histogram.size());
    return transitions.at(static_cast<std::size_t>(from) * n + static_cast<std::size_t>(to));
}

SchemeSpec SchemeSpec::framed(Scheme kind, const ProtocolConfig &config) {
    if (kind == Scheme::slotted_aloha) throw DomainError("slotted ALOHA is not a framed scheme");
    return {kind, config};
}

const ProtocolConfig &SchemeSpec::protocol() const {
    if (const auto *cfg = std::get_if<ProtocolConfig>(&config_)) return *cfg;
    throw DomainError("scheme has no frame configuration");
}

const AlohaConfig &SchemeSpec::aloha() const {
    if (const auto *cfg = std::get_if<AlohaConfig>(&config_)) return *cfg;
    throw DomainError("scheme has no slotted ALOHA configuration");
}

int SchemeSpec::users() const {
    return is_framed() ? protocol().users : aloha().users;
}

void SchemeSpec::validate() const {
    if (is_framed())
        protocol().validate();
    else
        aloha().validate();
}

std::int64_t default_warmup(const SchemeSpec &scheme) {
    return scheme.is_framed() ? std::int64_t{10000} * scheme.protocol().frame_size : std::int64_t{10000};
}

SimResult simulate(const SchemeSpec &scheme, std::int64_t horizon_slots, std::int64_t warmup_slots,
                   std::uint64_t seed, const SimOptions &options) {
    scheme.validate();
    validate_horizon(horizon_slots, warmup_slots);
    if (!scheme.is_framed()) {
        if (options.record_trace || options.trace_csv)
            throw DomainError("reception traces are only defined for framed schemes");
        return simulate_slotted_aloha(scheme.aloha(), horizon_slots, warmup_slots, seed);
    }
    return simulate_framed(scheme, horizon_slots, warmup_slots, seed, options);
}

SimResult simulate_slotted_aloha(const AlohaConfig &config, std::int64_t horizon, std::int64_t warmup,
                                 std::uint64_t seed) {
    config.validate();
    validate_horizon(horizon, warmup);
    const int n_users = config.users;

    SimResult result;
    result.scheme = SchemeSpec::slotted_aloha(config);
    result.horizon_slots = horizon;
    result.warmup_slots = warmup;
    result.seed = seed;

    // Event-driven: a buffered user's attempts form a Bernoulli(tau) sequence, so the
    // next attempt is a geometric skip away and only slots with events are visited.
    enum : int { kGeneration = 0, kAttempt = 1 };
    using Event = std::pair<std::int64_t, int>;   // (slot, 2 * user + kind)
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;

    Rng rng(seed);
    std::vector<std::int64_t> buffered(static_cast<std::size_t>(n_users), -1);
    std::vector<char> attempt_scheduled(static_cast<std::size_t>(n_users), 0);
    std::vector<AgeMeter> ages(static_cast<std::size_t>(n_users));
    for (int n = 0; n < n_users; ++n) events.emplace(rng.geometric(config.rho) - 1, 2 * n + kGeneration);

    std::vector<int> generating, attempting;
    while (!events.empty() && events.top().first < horizon) {
        const std::int64_t t = events.top().first;
        generating.clear();
        attempting.clear();
        while (!events.empty() && events.top().first == t) {
            const int code = events.top().second;
            events.pop();
            (code % 2 == kGeneration ? generating : attempting).push_back(code / 2);
        }

        // A new arrival replaces the buffered update before the access decision.
        for (int n : generating) {
            const auto idx = static_cast<std::size_t>(n);
            buffered[idx] = t;
            events.emplace(t + rng.geometric(config.rho), 2 * n + kGeneration);
            if (!attempt_scheduled[idx]) {
                attempt_scheduled[idx] = 1;
                const std::int64_t first = t + rng.geometric(config.tau) - 1;
                if (first == t)
                    attempting.push_back(n);
                else
                    events.emplace(first, 2 * n + kAttempt);
            }
        }

        if (attempting.size() == 1) {
            const int n = attempting.front();
            const auto idx = static_cast<std::size_t>(n);
            ages[idx].reset(t + 1, t + 1 - buffered[idx], warmup, horizon);
            buffered[idx] = -1;
            attempt_scheduled[idx] = 0;
            if (t >= warmup) ++result.reception_count;
        } else {
            for (int n : attempting) events.emplace(t + rng.geometric(config.tau), 2 * n + kAttempt);
        }
    }

    finalize_ages(result, ages);
    return result;
}

double confidence_halfwidth(const std::vector<double> &values) {
    const auto n = values.size();
    if (n < 2) return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    return boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(n));
}

ReplicatedResult simulate_replications(const SchemeSpec &scheme, std::int64_t horizon_slots,
                                       std::int64_t warmup_slots, std::uint64_t seed, int replications,
                                       const SimOptions &options, int workers) {
    if (replications < 1) throw DomainError("at least one replication is required");
    if (options.trace_csv && replications > 1)
        throw DomainError("a trace stream can only be attached to a single replication");
    scheme.validate();
    validate_horizon(horizon_slots, warmup_slots);

    ReplicatedResult out;
    out.runs.resize(static_cast<std::size_t>(replications));
    detail::parallel_for(replications, workers, [&](int r) {
        out.runs[static_cast<std::size_t>(r)] = simulate(scheme, horizon_slots, warmup_slots,
                                                         derive_stream_seed(seed, static_cast<std::uint64_t>(r)), options);
    });

    std::vector<double> values;
    for (const auto &run : out.runs) values.push_back(run.network_aaoi);
    out.mean_aaoi = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    out.ci_halfwidth = confidence_halfwidth(values);
    for (auto &run : out.runs) run.ci_halfwidth = out.ci_halfwidth;
    return out;
}

namespace {

struct MomentEstimate {
    EmpiricalMoments m;
    bool ok = false;
};

MomentEstimate estimate(const ReceptionSums &s) {
    MomentEstimate est;
    if (s.receptions < 1 || s.pairs < 1) return est;
    const double nr = static_cast<double>(s.receptions);
    const double np = static_cast<double>(s.pairs);
    EmpiricalMoments &e = est.m;
    e.receptions = s.receptions;
    e.pairs = s.pairs;
    e.moments.e_S = s.s / nr;
    e.moments.e_l = s.l / nr;
    e.moments.e_Z = s.z / nr;
    e.moments.e_alpha = s.alpha / nr;
    e.var_alpha = s.alpha2 / nr - e.moments.e_alpha * e.moments.e_alpha;
    e.e_X = s.x / np;
    e.e_X2 = s.x2 / np;
    e.e_SX = s.sx / np;
    e.moments.e_Y = s.y / np;
    e.moments.e_Y2 = s.y2 / np;
    e.moments.e_W = s.w / np;
    e.moments.e_W2 = s.w2 / np;
    e.moments.e_K = s.k / np;
    e.moments.e_K2 = s.k2 / np;
    e.lemma1_residual = e.e_X2 - e.moments.e_Y2 - 2.0 * e.var_alpha;
    e.lemma2_residual = e.e_SX - (e.moments.e_S * e.moments.e_Y - e.var_alpha);
    est.ok = true;
    return est;
}

double batch_stderr(const std::vector<double> &values) {
    const auto n = values.size();
    if (n < 2) return std::numeric_limits<double>::infinity();
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

} // namespace

EmpiricalMoments empirical_moment_report(const SimResult &result) {
    if (!result.trace) throw DomainError("simulation was run without trace recording");
    const TraceSummary &trace = *result.trace;
    if (trace.total.receptions < kMinMomentSamples || trace.total.pairs < kMinMomentSamples)
        throw InsufficientSamplesError(
            fmt::format("only {} receptions recorded, need {}", trace.total.receptions, kMinMomentSamples));

    MomentEstimate overall = estimate(trace.total);
    std::vector<double> lemma1, lemma2, e_k;
    for (const auto &batch : trace.batches) {
        const MomentEstimate b = estimate(batch);
        if (!b.ok) continue;
        lemma1.push_back(b.m.lemma1_residual);
        lemma2.push_back(b.m.lemma2_residual);
        e_k.push_back(b.m.moments.e_K);
    }
    overall.m.lemma1_stderr = batch_stderr(lemma1);
    overall.m.lemma2_stderr = batch_stderr(lemma2);
    overall.m.e_K_stderr = batch_stderr(e_k);
    return overall.m;
}

} // namespace fsard
