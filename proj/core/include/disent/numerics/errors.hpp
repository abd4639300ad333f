#pragma once

#include <stdexcept>
#include <string>

namespace disent {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand extents do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf encountered where finite values are required.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Input is well-formed but mathematically degenerate (e.g. zero norm).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed file content; the message names the location.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace disent
