#pragma once

#include <stdexcept>
#include <string>

namespace fsard {

/// Raised for arguments outside an operation's domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A protocol parameter failed validation. `parameter()` names the offending field
/// using the short protocol symbol (N, M, V, rho, gamma, tau).
class ConfigError : public DomainError {
public:
    ConfigError(std::string parameter, const std::string &message)
        : DomainError(parameter + ": " + message), parameter_(std::move(parameter)) {}

    const std::string &parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

class NonConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The chain has more than one closed communicating class.
class DegenerateChainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientSamplesError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A stochastic search could not separate the best grid point from its neighbours.
class AmbiguousOptimumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fsard
