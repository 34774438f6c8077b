#pragma once

#include <vector>

#include "hrc/robot_model.hpp"
#include "hrc/types.hpp"

namespace hrc::kin {

/// Cumulative frame of every link: frames[i] maps link i coordinates to the
/// world (base) frame, i.e. the product of the first i+1 DH transforms.
inline std::vector<Frame> forward_kinematics(const RobotModel& model, const JointVector& q) {
  const int n = model.dof();
  require(q.size() == n, "forward_kinematics: q dimension mismatch");
  require(all_finite(q), "forward_kinematics: q must be finite");

  std::vector<Frame> frames;
  frames.reserve(n);
  Frame t = Frame::Identity();
  for (int i = 0; i < n; ++i) {
    const DhRow& r = model.dh[i];
    const double th = r.theta_offset + q[i];
    const double ct = std::cos(th), st = std::sin(th);
    const double ca = std::cos(r.alpha), sa = std::sin(r.alpha);
    Frame step;
    step.matrix() << ct, -st * ca,  st * sa, r.a * ct,
                     st,  ct * ca, -ct * sa, r.a * st,
                      0,       sa,       ca,      r.d,
                      0,        0,        0,        1;
    t = t * step;
    frames.push_back(t);
  }
  return frames;
}

/// 3xn positional Jacobian of a world point rigidly attached to `link`,
/// using precomputed frames. Column j is z_j x (p - o_j) for j <= link and
/// zero beyond: joints past the link cannot move its points.
inline Eigen::Matrix3Xd link_point_jacobian(const RobotModel& model, const std::vector<Frame>& frames,
                                            int link, const Vec3& world_point) {
  const int n = model.dof();
  require(link >= 0 && link < n, "link_point_jacobian: link index out of range");
  require(static_cast<int>(frames.size()) == n, "link_point_jacobian: frames size mismatch");

  Eigen::Matrix3Xd jac = Eigen::Matrix3Xd::Zero(3, n);
  for (int j = 0; j <= link; ++j) {
    // Joint j rotates about the z axis of the frame preceding it.
    Vec3 axis = Vec3::UnitZ();
    Vec3 origin = Vec3::Zero();
    if (j > 0) {
      axis = frames[j - 1].linear().col(2);
      origin = frames[j - 1].translation();
    }
    jac.col(j) = axis.cross(world_point - origin);
  }
  return jac;
}

inline Eigen::Matrix3Xd link_point_jacobian(const RobotModel& model, const JointVector& q,
                                            int link, const Vec3& world_point) {
  return link_point_jacobian(model, forward_kinematics(model, q), link, world_point);
}

/// Project a positional Jacobian onto a unit direction: the resulting row
/// times qdot is the scalar velocity of the point along d.
inline Eigen::RowVectorXd directed_jacobian(const Eigen::Matrix3Xd& jac, const Vec3& d) {
  require(std::abs(d.norm() - 1.0) <= 1e-6, "directed_jacobian: d must be a unit vector");
  return d.transpose() * jac;
}

}  // namespace hrc::kin
