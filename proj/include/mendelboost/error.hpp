#pragma once

#include <stdexcept>
#include <string>

namespace mendelboost {

// Base class for every error raised by the library. Callers that only care
// about "something in mendelboost failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace mendelboost
