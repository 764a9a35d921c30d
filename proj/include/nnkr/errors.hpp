#pragma once

#include <stdexcept>
#include <string>

namespace nnkr {

// Every error raised by the library derives from Error so that callers (the
// CLI in particular) can map categories onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or dimensions of operands do not match, or a dimension is degenerate.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A scalar parameter is outside its admissible range (p < 1, s > N, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A formula is evaluated outside its domain (delta >= 4/sqrt(41), rho >= 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Certificate parameters cannot be combined (kappa * rho >= 1).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// An argument violates a structural contract (non-Hermitian T, negative z, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// A premise required by a bound or diagnostic does not hold (n < psi2^4, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Input data are unusable (NaN entries, empty samples, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// The exhaustive enumeration guard was exceeded.
class GuardExceeded : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// The M+ criterion fails for the supplied T (some weight is not positive).
class MPlusViolation : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

/// Malformed configuration or command line.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace nnkr
