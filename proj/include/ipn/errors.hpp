#pragma once

#include <stdexcept>
#include <string>

namespace ipn {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input is structurally invalid (malformed measure, bad config field).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Argument lies outside the domain of the operation (e.g. inside a support).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative method or root isolation failed to converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of a verification routine does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A spike sits too close to a boundary of the admissible set to classify.
class AmbiguousSpike : public Error {
public:
    using Error::Error;
};

/// The dense singular value routine reported a failure.
class LinAlgError : public Error {
public:
    using Error::Error;
};

}  // namespace ipn
