#pragma once

#include <stdexcept>
#include <string>

namespace acov {

// Error taxonomy shared by every module. All derive from std::runtime_error
// so callers that do not care about the category can catch one type.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: wrong shapes, non-finite entries, out-of-range indices.
class InputError : public Error {
public:
    using Error::Error;
};

/// Arguments outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Request exceeds what the implementation supports (e.g. enumeration size).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Unstable dynamics: spectral radius too close to or above one.
class InstabilityError : public Error {
public:
    using Error::Error;
};

/// A numerical post-condition could not be met.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration. `path` names the offending field.
class ValidationError : public Error {
public:
    ValidationError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Report persistence failed.
class PersistenceError : public Error {
public:
    using Error::Error;
};

}  // namespace acov
