#pragma once

#include <stdexcept>
#include <string>

namespace pxeig {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: syntax, unknown keys, out-of-range settings.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A pointwise evaluation produced a non-finite or undefined value.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exponent field violates h(x) > 1 or is not finite.
class InvalidExponent : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a result (bracketing, empty region, ...).
class ComputationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pxeig
