#pragma once

#include <stdexcept>
#include <string>

namespace stratcause {

/// Base for every data or validation failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV / JSON); the message names the location.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A structural invariant does not hold (normalization, key mismatch, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A cell required to be strictly positive is zero.
class PositivityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Observational and experimental inputs contradict consistency.
class IncompatibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace stratcause
