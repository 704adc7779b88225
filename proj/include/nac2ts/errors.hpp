#pragma once

#include <stdexcept>
#include <string>

namespace nac2ts {

/// Scalar argument outside its admissible range (probabilities, exponents, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Mismatched dimensions between containers that must agree.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Data violates a structural invariant (rows off the simplex, reward out of [0,1], ...).
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Chain is reducible or periodic where ergodicity is required.
struct ErgodicityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical routine failed to reach its advertised accuracy.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed configuration file or CLI usage.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nac2ts
