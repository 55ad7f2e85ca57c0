#pragma once

#include <stdexcept>
#include <string>

namespace qcast {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix dimensions are inconsistent with the requested operation.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Input required to be Hermitian deviates beyond tolerance.
class NotHermitian : public Error {
 public:
  using Error::Error;
};

// Input required to be positive semidefinite has an eigenvalue below -tol.
class NotPositive : public Error {
 public:
  using Error::Error;
};

// Density operator trace deviates from one beyond tolerance.
class TraceNotOne : public Error {
 public:
  using Error::Error;
};

// Operator required to be unitary deviates beyond tolerance.
class NotUnitary : public Error {
 public:
  using Error::Error;
};

// Requested rank is outside the valid range for the dimension.
class InvalidRank : public Error {
 public:
  using Error::Error;
};

// POVM elements fail Hermiticity, positivity, or completeness.
class InvalidPovm : public Error {
 public:
  using Error::Error;
};

// State pair does not commute within the tolerance required here.
class NotCommuting : public Error {
 public:
  using Error::Error;
};

// Kraus decomposition of the dilation is not trace preserving.
class NotTracePreserving : public Error {
 public:
  using Error::Error;
};

// Search or sweep configuration holds an out-of-range value.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// An iterative eigenvalue or singular value routine failed to converge.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

// Input file or JSON document violates the expected schema.
class InvalidFormat : public Error {
 public:
  using Error::Error;
};

}  // namespace qcast
