#pragma once

#include <stdexcept>
#include <string>

namespace stripeforge {

// Precondition or input-contract violation (bad mesh, bad config, bad argument).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-convergence, inversion, singular systems.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The pinned vertex lost its phase; the run must restart with another pin.
class RepinRequired : public SolverError {
 public:
  using SolverError::SolverError;
};

// I/O failure while reading or writing artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stripeforge
