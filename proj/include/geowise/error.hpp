#pragma once

#include <stdexcept>
#include <string>

namespace geowise {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: unreadable files, malformed documents, missing columns.
class InputError : public Error {
public:
    using Error::Error;
};

// A well-formed request whose numerical evaluation is impossible.
class ComputationError : public Error {
public:
    using Error::Error;
};

// The metric is undefined for this data (e.g. zero denominator).
class UndefinedMetricError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

// A regression fit has no unique solution (constant series).
class DegenerateFitError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

// No usable (complete) observations remained.
class EmptyInputError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

}  // namespace geowise
