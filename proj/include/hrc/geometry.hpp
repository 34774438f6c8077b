#pragma once

#include <algorithm>
#include <cmath>

#include "hrc/types.hpp"

namespace hrc::geom {

/// Line segment between two points. Degenerate (zero-length) segments are
/// valid and behave as points.
struct Segment {
  Vec3 a;
  Vec3 b;
};

struct SegmentDistanceResult {
  double distance = 0.0;
  Vec3 point_a = Vec3::Zero();  // closest point on segment A
  Vec3 point_b = Vec3::Zero();  // closest point on segment B
};

/// Minimum distance between segments [a0,a1] and [b0,b1] with the closest
/// point on each. Clamped quadratic minimization; handles every degenerate
/// combination (point-point, point-segment, parallel).
inline SegmentDistanceResult segment_segment_distance(const Vec3& a0, const Vec3& a1,
                                                      const Vec3& b0, const Vec3& b1) {
  const Vec3 u = a1 - a0;
  const Vec3 v = b1 - b0;
  const Vec3 w = a0 - b0;

  const double uu = u.dot(u);
  const double vv = v.dot(v);
  const double uv = u.dot(v);
  const double uw = u.dot(w);
  const double vw = v.dot(w);

  constexpr double kTiny = 1e-15;
  double s = 0.0, t = 0.0;

  if (uu <= kTiny && vv <= kTiny) {
    // both points
  } else if (uu <= kTiny) {
    t = std::clamp(vw / vv, 0.0, 1.0);
  } else if (vv <= kTiny) {
    s = std::clamp(-uw / uu, 0.0, 1.0);
  } else {
    const double denom = uu * vv - uv * uv;
    if (denom > kTiny * uu * vv) {
      s = std::clamp((uv * vw - vv * uw) / denom, 0.0, 1.0);
    } else {
      s = 0.0;  // parallel: pick an endpoint, clamping below fixes t
    }
    t = (uv * s + vw) / vv;
    if (t < 0.0) {
      t = 0.0;
      s = std::clamp(-uw / uu, 0.0, 1.0);
    } else if (t > 1.0) {
      t = 1.0;
      s = std::clamp((uv - uw) / uu, 0.0, 1.0);
    }
  }

  SegmentDistanceResult r;
  r.point_a = a0 + s * u;
  r.point_b = b0 + t * v;
  r.distance = (r.point_a - r.point_b).norm();
  return r;
}

inline SegmentDistanceResult segment_segment_distance(const Segment& sa, const Segment& sb) {
  return segment_segment_distance(sa.a, sa.b, sb.a, sb.b);
}

}  // namespace hrc::geom
