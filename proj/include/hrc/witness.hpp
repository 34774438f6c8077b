#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "hrc/geometry.hpp"
#include "hrc/kinematics.hpp"
#include "hrc/robot_model.hpp"

namespace hrc::kin {

/// Human skeleton snapshot: named keypoints plus the bone segments declared
/// between them. Distances are measured against both the bones and every
/// keypoint, so isolated keypoints still count.
struct HumanSkeleton {
  std::vector<std::string> names;
  std::vector<Vec3> points;
  std::vector<std::array<int, 2>> bones;  // indices into points

  int find(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }
};

/// Closest pair between one robot link and the human skeleton.
/// When distance is zero the direction degenerates; it is set to zero and
/// the witness reports contact.
struct LinkWitness {
  int link_index = -1;
  Vec3 robot_point = Vec3::Zero();
  Vec3 human_point = Vec3::Zero();
  double distance = 0.0;    // S_p [m]
  Vec3 direction = Vec3::Zero();  // unit, robot -> human

  bool in_contact() const { return distance <= 0.0; }
};

/// Per-link minimum distance between the robot (link segments mapped through
/// the frames) and the human skeleton.
inline std::vector<LinkWitness> min_human_robot_distance(const RobotModel& model,
                                                         const std::vector<Frame>& frames,
                                                         const HumanSkeleton& human) {
  require(!human.points.empty(), "min_human_robot_distance: no human keypoints");
  const int n = model.dof();
  require(static_cast<int>(frames.size()) == n, "min_human_robot_distance: frames size mismatch");

  std::vector<geom::Segment> human_prims;
  human_prims.reserve(human.bones.size() + human.points.size());
  for (const auto& b : human.bones)
    human_prims.push_back({human.points[b[0]], human.points[b[1]]});
  for (const auto& p : human.points) human_prims.push_back({p, p});

  std::vector<LinkWitness> out(n);
  for (int i = 0; i < n; ++i) {
    LinkWitness best;
    best.link_index = i;
    best.distance = std::numeric_limits<double>::infinity();
    for (const auto& seg : model.link_segments[i]) {
      const Vec3 a0 = frames[i] * seg.a;
      const Vec3 a1 = frames[i] * seg.b;
      for (const auto& hp : human_prims) {
        const auto r = geom::segment_segment_distance(a0, a1, hp.a, hp.b);
        if (r.distance < best.distance) {
          best.distance = r.distance;
          best.robot_point = r.point_a;
          best.human_point = r.point_b;
        }
      }
    }
    best.direction = best.distance > 0.0
                         ? Vec3((best.human_point - best.robot_point) / best.distance)
                         : Vec3::Zero();
    out[i] = best;
  }
  return out;
}

inline std::vector<LinkWitness> min_human_robot_distance(const RobotModel& model,
                                                         const JointVector& q,
                                                         const HumanSkeleton& human) {
  return min_human_robot_distance(model, forward_kinematics(model, q), human);
}

}  // namespace hrc::kin
