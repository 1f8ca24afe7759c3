#pragma once

#include <stdexcept>
#include <string>

namespace qas {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched lengths between configurations, models, fields, or states.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A value violates a structural invariant (bad clause, duplicate clause,
/// inconsistent solution, malformed bias field, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A document could not be parsed at all (bad syntax, wrong field shape).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Requested size exceeds an enumeration or engine capacity cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// An argument is outside its allowed range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Instance generation exhausted its restart budget.
class GenerationError : public Error {
public:
    using Error::Error;
};

/// Rescaling was asked for a model with no couplings and no fields.
class DegenerateModelError : public Error {
public:
    using Error::Error;
};

/// Non-finite amplitudes or a broken norm after time evolution.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// An operation that requires shot-sampled records was given exact-mode ones
/// (or the other way around).
class ModeError : public Error {
public:
    using Error::Error;
};

} // namespace qas
