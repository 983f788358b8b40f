#pragma once

#include <stdexcept>
#include <string>

namespace cib {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when operands of a graph op have incompatible extents.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed dataset files, schema violations, degenerate splits.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or similar numerical failure during fitting.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace cib
