#pragma once

#include <stdexcept>
#include <string>

namespace stocca {

/// Bad input or configuration: shapes, ranges, file formats, unknown keys.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension mismatch between an operator and its argument.
class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A computation that ran but could not produce a usable number
/// (singular system, divergence, non-convergence under a strict budget).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stocca
