// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include <numbers>
#include <stdexcept>
#include <string>

namespace ils {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * (kPi / 180.0); }
inline double rad2deg(double rad) { return rad * (180.0 / kPi); }

inline constexpr const char* kToolVersion = "0.3.1";

// Error families map one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input (files, records, fields).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input whose values break a domain invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A numeric kernel failed (solver did not converge, empty output, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// No configuration satisfies the requested constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace ils
