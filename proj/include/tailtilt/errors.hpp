#pragma once

#include <stdexcept>
#include <string>

namespace tailtilt {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter or input value lies outside its mathematical domain
/// (nonexistent moment, point outside a distribution's support, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A caller-supplied argument violates a precondition (bad k, empty
/// sample, malformed rule or config).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// An iterative numerical routine failed to converge.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A model fit failed (degenerate data, no solution, separation).
class FitError : public Error {
public:
    using Error::Error;
};

/// The moment-matching equation has no finite solution because the
/// target lies outside the carrier's achievable range.
class NonExistenceError : public FitError {
public:
    using FitError::FitError;
};

/// Logistic fit aborted: the two classes are perfectly separated in T.
class SeparationError : public FitError {
public:
    using FitError::FitError;
};

/// A required variance/second moment is zero (all-equal data).
class DegeneracyError : public FitError {
public:
    using FitError::FitError;
};

/// An estimator cannot produce a finite estimate (threshold above the
/// sample maximum, fitted tail index implies an infinite mean, ...).
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Data ingestion failed (missing file, non-numeric line, empty input).
class IngestError : public Error {
public:
    using Error::Error;
};

/// A scenario config document violates the schema. `path()` points at
/// the offending field, JSON-pointer style.
class ConfigError : public ArgumentError {
public:
    ConfigError(std::string path, const std::string& what)
        : ArgumentError(path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace tailtilt
