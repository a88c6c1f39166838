#pragma once

#include <stdexcept>
#include <string>

namespace tsl {

/// Argument outside the mathematical domain of an operation (e.g. t outside [0,2]).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Square or time not aligned with the dyadic structure an operation requires.
struct AlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flow query touching t = 1 for a field with infinitely many stages there.
struct SingularTimeError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Fixed-step integration failed its step-halving validation.
struct StepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid scenario configuration or parameters.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tsl
