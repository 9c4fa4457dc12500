#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace vpb {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// sqrt(2/3) shows up in every macroscopic coupling
inline const double kSqrt23 = std::sqrt(2.0 / 3.0);

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs outside an operation's domain (xi = 0, eps outside (0,1), ...).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The small-parameter regime eps|s| <= r0 was left or a root solve lost its branch.
struct RegimeViolation : Error {
  using Error::Error;
};

// Assembly produced an operator that fails a structural check.
struct AssemblyFailure : Error {
  using Error::Error;
};

struct SolverFailure : Error {
  using Error::Error;
};

}  // namespace vpb
