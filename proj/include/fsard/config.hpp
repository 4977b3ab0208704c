#pragma once

#include <string>
#include <string_view>

namespace fsard {

enum class Scheme {
    fsa_rd,        // multiple reservation attempts per update
    fsa_rd_one,    // one reservation attempt, unsent packets dropped at frame end
    slotted_aloha,
};

std::string_view to_string(Scheme scheme);

/// Accepts "fsa-rd", "fsa_rd", "FSA_RD", "fsa-rd-one", "aloha", "slotted-aloha", ...
Scheme parse_scheme(std::string_view text);

/// Parameters of a framed reservation network.
///
/// Each frame has `frame_size` slots: one reservation slot split into
/// `mini_slots` mini-slots, then `frame_size - 1` data slots.
struct ProtocolConfig {
    int users = 1;          // N
    int frame_size = 2;     // M, in 2..V+1
    int mini_slots = 1;     // V
    double rho = 1.0;       // per-slot update generation probability
    double gamma = 1.0;     // per-frame reservation probability of an active user

    /// Probability that at least one update is generated during a frame, 1-(1-rho)^M.
    double arrival_prob() const;

    /// (1-rho)^M.
    double idle_prob() const;

    int data_slots() const { return frame_size - 1; }

    /// Throws ConfigError naming the first offending parameter.
    void validate() const;

    friend bool operator==(const ProtocolConfig &, const ProtocolConfig &) = default;
};

struct AlohaConfig {
    int users = 1;
    double rho = 1.0;
    double tau = 1.0;   // per-slot transmission probability of a user holding a packet

    void validate() const;

    friend bool operator==(const AlohaConfig &, const AlohaConfig &) = default;
};

/// Validates (N, V, M, rho) without a reservation probability.
void validate_frame_parameters(int users, int mini_slots, int frame_size, double rho);

/// 1-(1-rho)^M evaluated without cancellation for small rho.
double frame_arrival_prob(double rho, int frame_size);

} // namespace fsard
