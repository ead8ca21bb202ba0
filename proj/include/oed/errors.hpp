#pragma once

#include <stdexcept>
#include <string>

namespace oed {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Cholesky pivot fell below the breakdown tolerance.
class NotPositiveDefinite : public Error {
public:
  using Error::Error;
};

/// The information matrix of a design could not be factorized.
class SingularInformationMatrix : public Error {
public:
  using Error::Error;
};

class DegenerateInput : public Error {
public:
  using Error::Error;
};

class NonFiniteValue : public Error {
public:
  using Error::Error;
};

class MissingJacobianDerivative : public Error {
public:
  using Error::Error;
};

class InfeasibleStart : public Error {
public:
  using Error::Error;
};

class EmptyFeasibleSet : public Error {
public:
  using Error::Error;
};

/// sᵀBs ≤ 0 in a quasi-Newton update; the caller should reset B.
class DegenerateStep : public Error {
public:
  using Error::Error;
};

class RootNotBracketed : public Error {
public:
  using Error::Error;
};

/// Adaptive integrator step fell below its minimum size.
class StepSizeUnderflow : public Error {
public:
  using Error::Error;
};

class FilterExhausted : public Error {
public:
  using Error::Error;
};

/// Invalid user-supplied configuration (maps to CLI exit code 2).
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace oed
