#pragma once

#include <stdexcept>
#include <string>

namespace yudovich {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (p < p0, h > ã, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent arguments (length mismatch, bad test-function support).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Enumeration or allocation guard tripped.
class SizeError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed to reach its tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StiffnessError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConstructionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class FitError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConservationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConditionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Near-field accumulation did not settle; carries the partial Dini-type integral seen so far.
class AccuracyError : public NumericalError {
public:
    AccuracyError(const std::string& what, double partial_dini)
        : NumericalError(what), partial_dini_(partial_dini) {}
    double partial_dini() const { return partial_dini_; }

private:
    double partial_dini_ = 0.0;
};

}  // namespace yudovich
