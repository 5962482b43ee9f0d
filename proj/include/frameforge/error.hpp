#pragma once

#include <stdexcept>
#include <string>

namespace frameforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: dimension mismatches, bad parameters, unreadable files.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A mathematical hypothesis of a construction does not hold for the input.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace frameforge
