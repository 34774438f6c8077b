#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "hrc/kinematics.hpp"
#include "hrc/trajectory.hpp"
#include "hrc/witness.hpp"

namespace hrc::safety {

/// Parameters of the separation-monitoring speed limit and of the human
/// speed estimator. C is the intrusion margin, Z_d and Z_r the human and
/// robot position uncertainties.
struct SafetyParams {
  double C = 0.10;    // m
  double Z_d = 0.05;  // m
  double Z_r = 0.02;  // m
  double a_max = 3.0;  // m/s^2, maximum robot deceleration
  double T_r = 0.002;  // s, robot reaction time
  double v_h_filter_alpha = 0.1;  // exponential smoothing weight, (0,1]
  bool v_h_clamp_nonneg = true;   // a receding human does not raise the limit

  void validate() const {
    require(C >= 0.0 && Z_d >= 0.0 && Z_r >= 0.0, "safety params: margins must be >= 0");
    require(a_max > 0.0, "safety params: a_max must be > 0");
    require(T_r > 0.0, "safety params: T_r must be > 0");
    require(v_h_filter_alpha > 0.0 && v_h_filter_alpha <= 1.0,
            "safety params: v_h_filter_alpha must be in (0,1]");
  }

  double margin_sum() const { return C + Z_d + Z_r; }
};

/// Speed limit toward the operator at separation S_p with the human closing
/// at v_h. Clamped to zero whenever the separation budget is already spent,
/// so the function is total.
inline double iso_speed_limit(double v_h, double S_p, const SafetyParams& p) {
  const double at = p.a_max * p.T_r;
  const double radicand = v_h * v_h + at * at - 2.0 * p.a_max * (p.margin_sum() - S_p);
  if (radicand <= 0.0) return 0.0;
  return std::max(0.0, std::sqrt(radicand) - at - v_h);
}

/// Filtered per-link directed human speed (positive = approaching).
struct HumanSpeedEstimate {
  Eigen::VectorXd v_h;  // m/s, one entry per robot link
  double timestamp = 0.0;

  static HumanSpeedEstimate zero(int links, double timestamp = 0.0) {
    return {Eigen::VectorXd::Zero(links), timestamp};
  }
};

/// Scalar velocity of each link's witness point along the witness direction
/// (positive toward the human). Zero for links in contact.
inline Eigen::VectorXd directed_link_speeds(const kin::RobotModel& model,
                                            const std::vector<Frame>& frames,
                                            const JointVector& qd,
                                            const std::vector<kin::LinkWitness>& witnesses) {
  const int n = model.dof();
  require(static_cast<int>(witnesses.size()) == n, "directed_link_speeds: witness count");
  require(qd.size() == n, "directed_link_speeds: qd dimension");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (witnesses[i].in_contact()) continue;
    const auto jac = kin::link_point_jacobian(model, frames, i, witnesses[i].robot_point);
    out[i] = kin::directed_jacobian(jac, witnesses[i].direction) * qd;
  }
  return out;
}

/// Tracks the directed human speed from consecutive witness samples.
/// The separation finite difference mixes robot and human motion, so the
/// robot's own approach speed is subtracted before filtering.
class HumanSpeedEstimator {
 public:
  explicit HumanSpeedEstimator(SafetyParams params, int links)
      : params_(params), est_(HumanSpeedEstimate::zero(links)) {}

  const HumanSpeedEstimate& update(const std::vector<kin::LinkWitness>& witnesses,
                                   const Eigen::VectorXd& robot_toward_speed, double dt,
                                   double timestamp) {
    require(dt > 0.0, "human speed estimator: dt must be > 0");
    const int n = static_cast<int>(witnesses.size());
    require(est_.v_h.size() == n, "human speed estimator: link count mismatch");
    require(robot_toward_speed.size() == n, "human speed estimator: speed vector size");

    if (has_prev_) {
      const double beta = params_.v_h_filter_alpha;
      for (int i = 0; i < n; ++i) {
        const double raw =
            -(witnesses[i].distance - prev_[i].distance) / dt - robot_toward_speed[i];
        est_.v_h[i] = (1.0 - beta) * est_.v_h[i] + beta * raw;
        if (params_.v_h_clamp_nonneg) est_.v_h[i] = std::max(0.0, est_.v_h[i]);
      }
    }
    // cold start keeps v_h at zero
    est_.timestamp = timestamp;
    prev_ = witnesses;
    has_prev_ = true;
    return est_;
  }

  const HumanSpeedEstimate& estimate() const { return est_; }

  void reset() {
    has_prev_ = false;
    est_ = HumanSpeedEstimate::zero(static_cast<int>(est_.v_h.size()));
  }

 private:
  SafetyParams params_;
  std::vector<kin::LinkWitness> prev_;
  bool has_prev_ = false;
  HumanSpeedEstimate est_;
};

enum class ConstraintKind { human_speed, joint_velocity, joint_acceleration, box };

inline const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::human_speed: return "v_max";
    case ConstraintKind::joint_velocity: return "qd";
    case ConstraintKind::joint_acceleration: return "qdd";
    case ConstraintKind::box: return "box";
  }
  return "?";
}

/// One linear condition lower <= coef * alpha <= upper.
struct ConstraintRow {
  ConstraintKind kind;
  int index;  // link or joint, -1 for box
  double coef;
  double lower;
  double upper;
};

struct ConstraintSet {
  std::vector<ConstraintRow> rows;
};

/// Assemble the per-cycle constraint system on the scaling factor.
/// Human rows pair the directed speed at nominal rate with the ISO limit; a
/// non-positive coefficient (motion away from or tangent to the human) never
/// produces an upper bound on alpha. A link in contact forces alpha to 0.
/// Joint rows bound the commanded velocity and the velocity change over one
/// reaction time.
inline ConstraintSet assemble_constraints(const kin::RobotModel& model,
                                          const std::vector<Frame>& frames,
                                          const JointVector& qd_current,
                                          const traj::GeometricPath& path, double s,
                                          double s_dot_nom,
                                          const std::vector<kin::LinkWitness>& witnesses,
                                          const HumanSpeedEstimate& estimate,
                                          const SafetyParams& p) {
  const int n = model.dof();
  require(s_dot_nom >= 0.0, "assemble_constraints: s_dot_nom must be >= 0");
  require(static_cast<int>(witnesses.size()) == n, "assemble_constraints: witness count");
  require(estimate.v_h.size() == n, "assemble_constraints: estimate size");
  require(qd_current.size() == n, "assemble_constraints: qd size");

  const double inf = std::numeric_limits<double>::infinity();
  const JointVector w = path.sample(s).derivative * s_dot_nom;

  ConstraintSet cs;
  cs.rows.reserve(3 * n + 1);
  for (int i = 0; i < n; ++i) {
    const double v_max = iso_speed_limit(estimate.v_h[i], witnesses[i].distance, p);
    if (witnesses[i].in_contact()) {
      cs.rows.push_back({ConstraintKind::human_speed, i, 1.0, -inf, 0.0});
      continue;
    }
    const auto jac = kin::link_point_jacobian(model, frames, i, witnesses[i].robot_point);
    const double g = kin::directed_jacobian(jac, witnesses[i].direction) * w;
    cs.rows.push_back({ConstraintKind::human_speed, i, g, -inf, v_max});
  }
  for (int j = 0; j < n; ++j)
    cs.rows.push_back({ConstraintKind::joint_velocity, j, w[j], model.qd_min[j], model.qd_max[j]});
  for (int j = 0; j < n; ++j)
    cs.rows.push_back({ConstraintKind::joint_acceleration, j, w[j],
                       qd_current[j] + p.T_r * model.qdd_min[j],
                       qd_current[j] + p.T_r * model.qdd_max[j]});
  cs.rows.push_back({ConstraintKind::box, -1, 1.0, 0.0, 1.0});
  return cs;
}

struct ScalingSolution {
  double alpha = 1.0;
  bool feasible = true;
  ConstraintKind active_kind = ConstraintKind::box;
  int active_index = -1;
  double violation = 0.0;  // worst residual when infeasible, 0 otherwise

  std::string active_constraint() const {
    std::string s = to_string(active_kind);
    if (active_index >= 0) s += "[" + std::to_string(active_index) + "]";
    return s;
  }
};

/// Exact maximization of alpha over the row intersection. Every row is
/// linear in the single scalar, so the feasible set is an interval inside
/// [0,1]; the solution is its upper end. When the interval is empty the
/// lower envelope wins (brake as hard as the deceleration rows allow) and
/// the worst residual is reported.
inline ScalingSolution solve_scaling(const ConstraintSet& cs) {
  constexpr double kTinyCoef = 1e-14;
  double lo = 0.0, hi = 1.0;
  ConstraintKind lo_kind = ConstraintKind::box, hi_kind = ConstraintKind::box;
  int lo_idx = -1, hi_idx = -1;
  bool hard_infeasible = false;

  for (const auto& row : cs.rows) {
    double r_lo, r_hi;
    if (row.coef > kTinyCoef) {
      r_lo = row.lower / row.coef;
      r_hi = row.upper / row.coef;
    } else if (row.coef < -kTinyCoef) {
      r_lo = row.upper / row.coef;
      r_hi = row.lower / row.coef;
    } else {
      // alpha cannot influence this row
      if (row.lower > 0.0 || row.upper < 0.0) hard_infeasible = true;
      continue;
    }
    if (r_hi < hi) { hi = r_hi; hi_kind = row.kind; hi_idx = row.index; }
    if (r_lo > lo) { lo = r_lo; lo_kind = row.kind; lo_idx = row.index; }
  }

  ScalingSolution sol;
  if (!hard_infeasible && lo <= hi) {
    sol.alpha = hi;
    sol.feasible = true;
    sol.active_kind = hi_kind;
    sol.active_index = hi_idx;
    return sol;
  }

  sol.feasible = false;
  sol.alpha = std::clamp(lo, 0.0, 1.0);
  sol.active_kind = lo_kind;
  sol.active_index = lo_idx;
  for (const auto& row : cs.rows) {
    const double val = row.coef * sol.alpha;
    const double residual = std::max({0.0, row.lower - val, val - row.upper});
    if (residual > sol.violation) {
      sol.violation = residual;
      sol.active_kind = row.kind;
      sol.active_index = row.index;
    }
  }
  return sol;
}

/// Robot-side state owned by the control loop.
struct ControlState {
  JointVector q;
  JointVector qd;
  traj::TimeLawState law;
};

struct StepResult {
  JointVector u;               // velocity command
  traj::TimeLawState law;      // advanced abscissa state
  ScalingSolution scaling;
  double s_dot_nominal = 0.0;
  Eigen::VectorXd v_rh;        // per-link directed speed of the command
  Eigen::VectorXd v_max;       // per-link ISO limit
  double min_sp = 0.0;
};

/// One control cycle: nominal rate, constraint assembly, scaling, command.
/// With the safety layer disabled the same quantities are computed but alpha
/// is pinned to 1, which is what the comparative runs record.
inline StepResult safety_step(const ControlState& state, const traj::GeometricPath& path,
                              const std::vector<kin::LinkWitness>& witnesses,
                              const HumanSpeedEstimate& estimate, const kin::RobotModel& model,
                              const SafetyParams& p, double dt, bool safety_enabled = true,
                              double s_dot_cap = 1.0) {
  const int n = model.dof();
  const double s = state.law.s;
  const double s_dot_nom = traj::nominal_rate(path, s, model, s_dot_cap);
  const auto frames = kin::forward_kinematics(model, state.q);
  const ConstraintSet cs =
      assemble_constraints(model, frames, state.qd, path, s, s_dot_nom, witnesses, estimate, p);

  StepResult out;
  if (safety_enabled) {
    out.scaling = solve_scaling(cs);
  } else {
    out.scaling.alpha = 1.0;
    out.scaling.feasible = true;
    out.scaling.active_kind = ConstraintKind::box;
    out.scaling.active_index = -1;
  }

  out.s_dot_nominal = s_dot_nom;
  out.u = path.sample(s).derivative * (s_dot_nom * out.scaling.alpha);
  out.law = traj::advance(state.law, s_dot_nom * out.scaling.alpha, dt);
  out.law.s_dot_nominal = s_dot_nom;

  out.v_rh = Eigen::VectorXd::Zero(n);
  out.v_max = Eigen::VectorXd::Zero(n);
  out.min_sp = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const auto& row = cs.rows[i];  // human rows come first
    out.v_rh[i] = witnesses[i].in_contact() ? 0.0 : row.coef * out.scaling.alpha;
    out.v_max[i] = iso_speed_limit(estimate.v_h[i], witnesses[i].distance, p);
    out.min_sp = std::min(out.min_sp, witnesses[i].distance);
  }
  return out;
}

}  // namespace hrc::safety
