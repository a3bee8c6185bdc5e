#pragma once

#include <Eigen/Dense>

namespace helios {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = 3.14159265358979323846;

/// A point z = (q, p) of phase space. p is the wave vector (rad/m).
struct PhasePoint {
  Vec3 q = Vec3::Zero();
  Vec3 p = Vec3::Zero();

  Vec6 packed() const {
    Vec6 z;
    z << q, p;
    return z;
  }

  static PhasePoint unpack(const Vec6& z) { return {z.head<3>(), z.tail<3>()}; }
};

}  // namespace helios
