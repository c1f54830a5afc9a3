#pragma once

#include <stdexcept>
#include <string>

namespace mts {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A factorization met a pivot below the singularity threshold, or a matrix
/// that must be positive definite is not.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// An iterative routine hit its iteration cap.
class NotConverged : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented precondition or type invariant
/// (non-integer subcycling ratio, γ < 1/2, incompatible initial data, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The coupled saddle-point system cannot be solved: redundant constraints or
/// an inconsistent choice of time-steps.
class SingularSaddleSystem : public Error {
 public:
  using Error::Error;
};

}  // namespace mts
