#pragma once

#include <limits>
#include <vector>

#include "hrc/robot_model.hpp"
#include "hrc/types.hpp"

namespace hrc::traj {

/// Joint-space geometric path q_des(s), s in [0,1]. Piecewise cubic Hermite
/// through the waypoints with finite-difference tangents, clamped to the
/// one-sided chord slope at both ends; abscissas follow normalized cumulative
/// chord length. Collinear waypoints reproduce the straight line exactly.
class GeometricPath {
 public:
  struct Sample {
    JointVector position;    // q_des(s)
    JointVector derivative;  // dq_des/ds
  };

  static GeometricPath build(const std::vector<JointVector>& waypoints) {
    require(waypoints.size() >= 2, "build_path: need at least 2 waypoints");
    const Eigen::Index dim = waypoints.front().size();
    for (const auto& w : waypoints) {
      require(w.size() == dim, "build_path: waypoint dimension mismatch");
      require(all_finite(w), "build_path: waypoints must be finite");
    }

    GeometricPath p;
    p.points_ = waypoints;
    const size_t m = waypoints.size();

    std::vector<double> chord(m, 0.0);
    for (size_t k = 1; k < m; ++k) {
      const double len = (waypoints[k] - waypoints[k - 1]).norm();
      require(len > 1e-12, "build_path: consecutive identical waypoints");
      chord[k] = chord[k - 1] + len;
    }
    const double total = chord.back();
    p.knots_.resize(m);
    for (size_t k = 0; k < m; ++k) p.knots_[k] = chord[k] / total;
    p.knots_.front() = 0.0;
    p.knots_.back() = 1.0;

    p.tangents_.resize(m);
    p.tangents_[0] = (waypoints[1] - waypoints[0]) / (p.knots_[1] - p.knots_[0]);
    p.tangents_[m - 1] =
        (waypoints[m - 1] - waypoints[m - 2]) / (p.knots_[m - 1] - p.knots_[m - 2]);
    for (size_t k = 1; k + 1 < m; ++k)
      p.tangents_[k] =
          (waypoints[k + 1] - waypoints[k - 1]) / (p.knots_[k + 1] - p.knots_[k - 1]);
    return p;
  }

  Sample sample(double s) const {
    require(s >= 0.0 && s <= 1.0, "sample: s outside [0,1]");
    size_t k = segment_index(s);
    const double h = knots_[k + 1] - knots_[k];
    const double u = (s - knots_[k]) / h;

    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1;
    const double h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2;
    const double h11 = u3 - u2;
    const double d00 = (6 * u2 - 6 * u) / h;
    const double d10 = 3 * u2 - 4 * u + 1;
    const double d01 = (-6 * u2 + 6 * u) / h;
    const double d11 = 3 * u2 - 2 * u;

    Sample out;
    out.position = h00 * points_[k] + h10 * h * tangents_[k] + h01 * points_[k + 1] +
                   h11 * h * tangents_[k + 1];
    out.derivative =
        d00 * points_[k] + d10 * tangents_[k] + d01 * points_[k + 1] + d11 * tangents_[k + 1];
    return out;
  }

  int dim() const { return static_cast<int>(points_.front().size()); }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<JointVector>& waypoints() const { return points_; }

 private:
  size_t segment_index(double s) const {
    size_t lo = 0, hi = knots_.size() - 1;
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (knots_[mid] <= s) lo = mid; else hi = mid;
    }
    return lo;
  }

  std::vector<JointVector> points_;
  std::vector<double> knots_;
  std::vector<JointVector> tangents_;
};

inline GeometricPath build_path(const std::vector<JointVector>& waypoints) {
  return GeometricPath::build(waypoints);
}

/// Progress of the time law along a path.
struct TimeLawState {
  double s = 0.0;
  double s_dot_nominal = 0.0;  // last nominal rate, for the trace
  bool finished = false;
};

/// Largest abscissa rate such that dq/ds * s_dot stays inside every joint
/// velocity bound. A stationary path point (zero derivative) constrains
/// nothing; the configured cap applies there instead.
inline double nominal_rate(const GeometricPath& path, double s, const kin::RobotModel& model,
                           double s_dot_cap = 1.0) {
  const auto smp = path.sample(s);
  require(smp.derivative.size() == model.dof(), "nominal_rate: path/model dimension mismatch");
  double rate = std::numeric_limits<double>::infinity();
  bool bounded = false;
  for (int j = 0; j < model.dof(); ++j) {
    const double d = smp.derivative[j];
    if (std::abs(d) <= 1e-12) continue;
    const double bound = d > 0.0 ? model.qd_max[j] : model.qd_min[j];
    rate = std::min(rate, bound / d);
    bounded = true;
  }
  return bounded ? rate : s_dot_cap;
}

/// Euler step of the abscissa, saturating at the end of the path.
inline TimeLawState advance(const TimeLawState& state, double s_dot_effective, double dt) {
  require(s_dot_effective >= 0.0, "advance: negative rate");
  require(dt > 0.0, "advance: dt must be > 0");
  TimeLawState out = state;
  out.s = std::min(1.0, state.s + s_dot_effective * dt);
  out.finished = out.s >= 1.0;
  return out;
}

}  // namespace hrc::traj
