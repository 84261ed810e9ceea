#pragma once

#include <stdexcept>
#include <string>

namespace ck {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(const std::string& where, long expected, long got)
      : Error(where + ": dimension mismatch (expected " + std::to_string(expected) +
              ", got " + std::to_string(got) + ")") {}
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when I - sL cannot be inverted to the required residual.
class SingularSystem : public Error {
 public:
  SingularSystem(double s, const std::string& detail)
      : Error("singular resolvent system at s=" + std::to_string(s) + ": " + detail), s_(s) {}
  double s() const { return s_; }

 private:
  double s_;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

class MissingInnerProduct : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ck
