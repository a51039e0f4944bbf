#pragma once

#include <stdexcept>
#include <string>

namespace rumourlab {

// Base for every error the library raises. The CLI maps the subclasses onto
// exit codes (parse/validation 2, numeric divergence 3, I/O 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// tail_functionals() on a truncated law.
class TruncatedLawError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Simulated lattice or pixel grid too large to address.
class WindowOverflowError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EnumerationBoundError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LossyTruncationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// 1 - p*G(t) == 0 inside the printed 2D double-cover formula.
class DivisionByZeroError : public Error {
 public:
  using Error::Error;
};

class NumericDivergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rumourlab
