#pragma once

#include <stdexcept>
#include <string>

namespace pcsis {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or dimensions supplied by the caller.
class UsageError : public Error {
public:
    using Error::Error;
};

/// The black-box step function failed or produced a non-finite state.
class SimulationError : public Error {
public:
    using Error::Error;
};

/// A set description or run configuration cannot be used as given.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// The LP backend did not return a usable solution.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Malformed artifact (certificate, coefficient file, CSV, config).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A certificate cannot back a probability claim (void or zero volume).
class CertificateError : public Error {
public:
    using Error::Error;
};

/// Weight learning never drove the slack to zero.
class LearningFailure : public Error {
public:
    using Error::Error;
};

}  // namespace pcsis
