#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace eigennet {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad shape, out-of-range index).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Parsing of a text input (edge list, config file) failed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A numerical run hit a degenerate state (zero denominator, exhausted retries).
class DegenerateRun : public Error {
 public:
  using Error::Error;
};

}  // namespace eigennet
