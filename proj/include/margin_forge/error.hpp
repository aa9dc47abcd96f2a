#pragma once

#include <stdexcept>
#include <string>

namespace margin_forge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data (files, label sets, dimensions).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A solver or factorization hit a numerically unusable state.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration (CLI flags, config files, scheme strings).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace margin_forge
