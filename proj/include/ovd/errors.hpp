#pragma once

#include <stdexcept>
#include <string>

namespace ovd {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration, scene, or argument values (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

/// File system and serialization failures (CLI exit code 3).
struct IoError : Error {
    using Error::Error;
};

/// Numerical failures such as a covariance that is not positive definite
/// (CLI exit code 4).
struct NumericalError : Error {
    using Error::Error;
};

} // namespace ovd
