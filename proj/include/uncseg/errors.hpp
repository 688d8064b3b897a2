#pragma once

#include <stdexcept>
#include <string>

namespace uncseg {

// Shape/axis mismatches between tensors or masks.
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside its mathematical domain (negative sigma, bad label, ...).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN/Inf encountered where finite values are required.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (file or programmatic).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Autodiff graph lifecycle violations (backward on a stale graph, ...).
struct GraphError : std::runtime_error {
  explicit GraphError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / archive problems.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// CSV/archive schema violations (missing columns, bad manifest lines).
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// A metric has no defined value for the given inputs (empty contour,
// constant rank vector).
struct UndefinedMetricError : std::runtime_error {
  explicit UndefinedMetricError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace uncseg
