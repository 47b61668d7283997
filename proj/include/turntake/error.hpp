#pragma once

#include <stdexcept>
#include <string>

namespace turntake {

/// Base of every error the library throws on bad input or configuration.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, sequences, probability rows).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or settings (thresholds, grid sizes, metric ids).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace turntake
