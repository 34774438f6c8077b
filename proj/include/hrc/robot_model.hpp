#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hrc/geometry.hpp"
#include "hrc/types.hpp"

namespace hrc::kin {

/// One row of a standard Denavit-Hartenberg table (revolute joint):
/// T = Rz(theta_offset + q) * Tz(d) * Tx(a) * Rx(alpha).
struct DhRow {
  double a = 0.0;             // link length [m]
  double alpha = 0.0;         // link twist [rad]
  double d = 0.0;             // link offset [m]
  double theta_offset = 0.0;  // joint angle offset [rad]
};

/// Serial-chain description: DH table, collision segments per link (in the
/// link's own frame), joint velocity/acceleration limits, and the reaction
/// parameters used by the speed-limit computation.
struct RobotModel {
  std::string name;
  std::vector<DhRow> dh;
  std::vector<std::vector<geom::Segment>> link_segments;  // local frame of link i
  JointVector qd_min, qd_max;    // rad/s
  JointVector qdd_min, qdd_max;  // rad/s^2
  double reaction_time = 0.002;     // T_r [s]
  double max_deceleration = 3.0;    // a_max [m/s^2]

  int dof() const { return static_cast<int>(dh.size()); }

  void validate() const {
    require(!dh.empty(), "robot model: empty DH table");
    const int n = dof();
    require(static_cast<int>(link_segments.size()) == n,
            "robot model: link_segments count must equal joint count");
    for (const auto& segs : link_segments)
      require(!segs.empty(), "robot model: every link needs at least one segment");
    require(qd_min.size() == n && qd_max.size() == n, "robot model: velocity limit size");
    require(qdd_min.size() == n && qdd_max.size() == n, "robot model: acceleration limit size");
    for (int j = 0; j < n; ++j) {
      require(qd_min[j] < qd_max[j], "robot model: qd_min must be < qd_max");
      require(qdd_min[j] < 0.0 && qdd_max[j] > 0.0, "robot model: qdd limits must straddle 0");
    }
    require(reaction_time > 0.0, "robot model: reaction_time must be > 0");
    require(max_deceleration > 0.0, "robot model: max_deceleration must be > 0");
  }
};

inline JointVector joint_vector_from_json(const nlohmann::json& j, int n, const std::string& what) {
  require(j.is_array() && static_cast<int>(j.size()) == n,
          what + ": expected array of " + std::to_string(n) + " numbers");
  JointVector v(n);
  for (int k = 0; k < n; ++k) v[k] = j.at(k).get<double>();
  require(all_finite(v), what + ": values must be finite");
  return v;
}

inline Vec3 vec3_from_json(const nlohmann::json& j, const std::string& what) {
  require(j.is_array() && j.size() == 3, what + ": expected [x, y, z]");
  Vec3 v(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
  require(v.allFinite(), what + ": values must be finite");
  return v;
}

/// Parse a robot model document. Schema: docs/robot_model_format.md.
inline RobotModel robot_model_from_json(const nlohmann::json& j) {
  RobotModel m;
  require(j.is_object(), "robot model: expected an object");
  m.name = j.value("name", std::string("robot"));
  if (j.contains("convention"))
    require(j.at("convention") == "standard_dh", "robot model: convention must be standard_dh");

  require(j.contains("dh"), "robot model: missing dh table");
  for (const auto& row : j.at("dh")) {
    DhRow r;
    r.a = row.at("a").get<double>();
    r.alpha = row.at("alpha").get<double>();
    r.d = row.at("d").get<double>();
    r.theta_offset = row.value("theta_offset", 0.0);
    m.dh.push_back(r);
  }
  const int n = m.dof();

  require(j.contains("link_segments"), "robot model: missing link_segments");
  for (const auto& link : j.at("link_segments")) {
    std::vector<geom::Segment> segs;
    for (const auto& s : link)
      segs.push_back({vec3_from_json(s.at("from"), "link segment from"),
                      vec3_from_json(s.at("to"), "link segment to")});
    m.link_segments.push_back(std::move(segs));
  }

  m.qd_min = joint_vector_from_json(j.at("qd_min"), n, "qd_min");
  m.qd_max = joint_vector_from_json(j.at("qd_max"), n, "qd_max");
  m.qdd_min = joint_vector_from_json(j.at("qdd_min"), n, "qdd_min");
  m.qdd_max = joint_vector_from_json(j.at("qdd_max"), n, "qdd_max");
  m.reaction_time = j.at("reaction_time").get<double>();
  m.max_deceleration = j.at("max_deceleration").get<double>();

  m.validate();
  return m;
}

}  // namespace hrc::kin
