#include "fsard/config.hpp"

#include "fsard/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace fsard {

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
    case Scheme::fsa_rd: return "fsa-rd";
    case Scheme::fsa_rd_one: return "fsa-rd-one";
    case Scheme::slotted_aloha: return "slotted-aloha";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view text) {
    std::string key;
    for (char c : text) {
        char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        key.push_back(lower == '_' ? '-' : lower);
    }
    if (key == "fsa-rd" || key == "rd") return Scheme::fsa_rd;
    if (key == "fsa-rd-one" || key == "one" || key == "rd-one") return Scheme::fsa_rd_one;
    if (key == "slotted-aloha" || key == "aloha") return Scheme::slotted_aloha;
    throw ConfigError("scheme", "unknown scheme '" + std::string(text) + "'");
}

double frame_arrival_prob(double rho, int frame_size) {
    if (rho >= 1.0) return 1.0;
    return -std::expm1(frame_size * std::log1p(-rho));
}

void validate_frame_parameters(int users, int mini_slots, int frame_size, double rho) {
    if (users < 1) throw ConfigError("N", "number of users must be at least 1");
    if (mini_slots < 1) throw ConfigError("V", "number of mini-slots must be at least 1");
    if (frame_size < 2 || frame_size > mini_slots + 1)
        throw ConfigError("M", "frame size must lie in 2..V+1 (V=" + std::to_string(mini_slots) +
                                   ", M=" + std::to_string(frame_size) + ")");
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho", "generation probability must lie in (0, 1]");
}

double ProtocolConfig::arrival_prob() const { return frame_arrival_prob(rho, frame_size); }

double ProtocolConfig::idle_prob() const {
    if (rho >= 1.0) return 0.0;
    return std::exp(frame_size * std::log1p(-rho));
}

void ProtocolConfig::validate() const {
    validate_frame_parameters(users, mini_slots, frame_size, rho);
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ConfigError("gamma", "reservation probability must lie in (0, 1]");
}

void AlohaConfig::validate() const {
    if (users < 1) throw ConfigError("N", "number of users must be at least 1");
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho", "generation probability must lie in (0, 1]");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau", "transmission probability must lie in (0, 1]");
}

} // namespace fsard
