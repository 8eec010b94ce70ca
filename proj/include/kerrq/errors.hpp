#pragma once

#include <stdexcept>
#include <string>

namespace kerrq {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};
struct TailTooHeavy : Error {
  using Error::Error;
};
struct UnknownMode : Error {
  using Error::Error;
};
struct TruncationOverflow : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct DegenerateLeadingCoefficient : Error {
  using Error::Error;
};
struct NoSolution : Error {
  using Error::Error;
};
struct NonConvergence : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};

}  // namespace kerrq
