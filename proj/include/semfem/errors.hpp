#pragma once

#include <stdexcept>

namespace semfem {

// Error taxonomy used across the library and the CLI.
// ConfigError: invalid user input (bad key, bad value, inconsistent request).
// SolverError: numerical failure (divergent iteration, singular system, NaN energy).
// IoError: filesystem trouble (unreadable config, unwritable output path).

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace semfem
