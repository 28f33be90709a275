#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace irsdetect {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

enum class Hypothesis { H0, H1 };

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid scenario or run configuration (dimension, invariant, schema).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure (singular factorization, invalid intermediate).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that must be full rank for the operation is rank deficient.
class RankError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Statistic not defined for the given data (e.g. all-zero observation).
class UndefinedStatisticError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Series or iteration failed to converge; carries the partial value.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double partial_value)
      : NumericError(what), partial(partial_value) {}
  double partial;
};

}  // namespace irsdetect
