#pragma once

#include <stdexcept>
#include <string>

namespace resbox {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed (bracketing, convergence, non-finite values).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, including grids below the resolution bound.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Root or crossing search found nothing inside the requested bracket.
class SearchError : public Error {
 public:
  using Error::Error;
};

/// Energy outside the one-turning-point semiclassical regime.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Gap refinement could not isolate a single two-level crossing.
class RefinementError : public Error {
 public:
  using Error::Error;
};

/// A scaling study could not produce its observable at some hbar.
class StudyError : public Error {
 public:
  using Error::Error;
};

}  // namespace resbox
