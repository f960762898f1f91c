#pragma once

#include <stdexcept>
#include <string>

namespace s2r {

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when TD-Eliminate empties the survivor set; signals threshold
// misconfiguration at desk scale rather than a legitimate outcome.
struct EliminationAnomaly : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonTerminationAnomaly : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FirewallViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace s2r
