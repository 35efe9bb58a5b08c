#pragma once

#include <stdexcept>

namespace dnsgd {

// Base class for every error the library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// A Cholesky pivot fell at or below the tolerance; the damping shift did
// not make the system positive definite.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

struct EmptyMatrix : Error {
  using Error::Error;
};

struct EmptyBatch : Error {
  using Error::Error;
};

struct NonFiniteLoss : Error {
  using Error::Error;
};

struct WrongActivation : Error {
  using Error::Error;
};

struct InvalidConfig : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct MissingColumn : Error {
  using Error::Error;
};

struct EmptyFile : Error {
  using Error::Error;
};

struct BatchTooLarge : Error {
  using Error::Error;
};

struct BadSplitSize : Error {
  using Error::Error;
};

}  // namespace dnsgd
