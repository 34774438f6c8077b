#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hrc {

using Vec3 = Eigen::Vector3d;
using Frame = Eigen::Isometry3d;

/// Joint-space vector (positions in rad, velocities in rad/s).
using JointVector = Eigen::VectorXd;

inline bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.allFinite();
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace hrc
