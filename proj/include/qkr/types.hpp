#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qkr {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Error hierarchy. Every failure a caller may want to distinguish gets its
// own type; the CLI maps ConfigError to exit code 2 and everything else
// derived from Error to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SymmetryViolation : public Error {
 public:
  using Error::Error;
};

class TruncationError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class NoValidConvergent : public Error {
 public:
  using Error::Error;
};

}  // namespace qkr
