#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace klift {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when a vector or matrix argument has the wrong shape.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for arguments outside an operation's domain (negative state for a
/// fractional-power system, empty candidate pool, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical breakdown: NaN in an integrator, diverging SGD, singular solve.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_dim(Index actual, Index expected, const char* what);

}  // namespace klift
