#pragma once

#include <stdexcept>
#include <string>

namespace stbf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class InvalidIndex : public Error {
 public:
  using Error::Error;
};

/// Square solve refused because the matrix is numerically singular.
class SingularMatrix : public Error {
 public:
  SingularMatrix(const std::string& what, double rcond)
      : Error(what), rcond_(rcond) {}
  /// Reciprocal condition estimate of the rejected matrix.
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

class FrameSizeError : public Error {
 public:
  using Error::Error;
};

class IncompleteCsi : public Error {
 public:
  using Error::Error;
};

class EnumerationRefused : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace stbf
