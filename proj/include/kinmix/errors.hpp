//============================================================================
// errors.hpp — exception hierarchy shared by all kinmix modules.
//============================================================================
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace kinmix {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid run parameters (bad resolution, bad dt, inconsistent sizes, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Malformed or non-finite input data (NaN grids, unreadable files, ...).
struct DataError : Error {
    using Error::Error;
};

// Resolution inadequate for the requested computation; carries the value
// that would be needed so callers can retry.
struct ResolutionError : ConfigError {
    ResolutionError(const std::string& msg, long required_)
        : ConfigError(msg), required(required_) {}
    long required;
};

// An internal cross-check failed (e.g. a kernel that should be isotropic
// is not); indicates a bug or a violated modeling assumption.
struct ConsistencyError : Error {
    using Error::Error;
};

// Iterative solver failed to converge; carries the last iterate.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, std::complex<double> last_)
        : Error(msg), last(last_) {}
    std::complex<double> last;
};

// A fit was requested on fewer usable samples than the minimum.
struct InsufficientDataError : Error {
    using Error::Error;
};

// Precondition helper; keeps call sites one-liners.
template <class E = ConfigError>
inline void check(bool cond, const std::string& msg) {
    if (!cond) throw E(msg);
}

}  // namespace kinmix
