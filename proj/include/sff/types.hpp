#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sff {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// Relative state in the Hill frame, ordered x, xdot, y, ydot, z, zdot
// (km and km/s).
using HillState = Vec6;

enum HillIndex : int { kX = 0, kXDot = 1, kY = 2, kYDot = 3, kZ = 4, kZDot = 5 };

inline Vec3 position_of(const HillState& s) { return {s[kX], s[kY], s[kZ]}; }
inline Vec3 velocity_of(const HillState& s) { return {s[kXDot], s[kYDot], s[kZDot]}; }

// Rows of the state that receive an acceleration (x, y, z second derivatives).
inline Vec3 accel_rows(const Vec6& v) { return {v[kXDot], v[kYDot], v[kZDot]}; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced while integrating.
class PropagationError : public Error {
 public:
  using Error::Error;
};

// A linear-algebra or iterative solve that did not meet its contract.
class SolverError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sff
