#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sblfem {

/// Invalid user input: parameters, config files, unsupported combinations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometric failure: degenerate tangents, tubular neighborhood violated,
/// inverted element maps.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure of a solve: singular pivot, residual contract violated.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, std::ptrdiff_t index)
      : NumericalError(what), index_(index) {}

  /// Offending pivot (or row/column) index, -1 if unknown.
  std::ptrdiff_t index() const { return index_; }

 private:
  std::ptrdiff_t index_;
};

/// File or stream failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sblfem
