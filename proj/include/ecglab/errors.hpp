#pragma once

#include <stdexcept>

namespace ecglab {

/// Configuration or input validation failure. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown (e.g. a fully degenerate overlap matrix). CLI exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ecglab
