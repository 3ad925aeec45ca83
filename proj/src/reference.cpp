#include "ftna/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ftna {

bool TrajectoryStore::update(const TrajectoryMsg& msg, double now,
                             const WatchdogConfig& cfg) {
  if (!validate_trajectory(msg, now, cfg).valid) {
    return false;
  }
  if (current_ && msg.seq <= current_->seq) {
    return false;
  }
  current_ = msg;
  received_at_ = now;
  return true;
}

void TrajectoryStore::clear() {
  current_.reset();
  received_at_ = 0.0;
}

namespace {

double lerp(double a, double b, double u) { return a + u * (b - a); }

double lerp_angle(double a, double b, double u) {
  return wrap_angle(a + u * wrap_angle(b - a));
}

ReferencePoint blend(const TrajectoryPoint& p0, const TrajectoryPoint& p1,
                     double u, RefMode mode) {
  ReferencePoint ref;
  ref.x = lerp(p0.x, p1.x, u);
  ref.y = lerp(p0.y, p1.y, u);
  ref.theta = lerp_angle(p0.theta, p1.theta, u);
  ref.kappa = lerp(p0.kappa, p1.kappa, u);
  ref.s = lerp(p0.s, p1.s, u);
  ref.v = lerp(p0.v, p1.v, u);
  ref.a = lerp(p0.a, p1.a, u);
  ref.source_mode = mode;
  return ref;
}

ReferencePoint from_point(const TrajectoryPoint& p, RefMode mode) {
  return ReferencePoint{p.x, p.y, p.theta, p.kappa, p.s, p.v, p.a, mode};
}

}  // namespace

std::optional<ReferencePoint> ref_by_time(const TrajectoryMsg& traj, double t) {
  if (traj.points.empty()) {
    return std::nullopt;
  }
  const double tau = t - traj.timestamp;
  if (tau < traj.points.front().relative_time ||
      tau > traj.points.back().relative_time) {
    return std::nullopt;
  }
  // Exact sample hits are returned verbatim so interpolation noise cannot
  // perturb a direct lookup.
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    const TrajectoryPoint& p0 = traj.points[i - 1];
    const TrajectoryPoint& p1 = traj.points[i];
    if (tau == p0.relative_time) {
      return from_point(p0, RefMode::kTrajectory);
    }
    if (tau == p1.relative_time) {
      return from_point(p1, RefMode::kTrajectory);
    }
    if (tau > p0.relative_time && tau < p1.relative_time) {
      const double u =
          (tau - p0.relative_time) / (p1.relative_time - p0.relative_time);
      return blend(p0, p1, u, RefMode::kTrajectory);
    }
  }
  return std::nullopt;
}

ReferencePoint ref_by_projection(const TrajectoryMsg& traj, double x, double y,
                                 std::optional<double> prev_s) {
  const auto& pts = traj.points;
  if (pts.size() == 1) {
    return from_point(pts.front(), RefMode::kPath);
  }

  struct Best {
    double dist2 = std::numeric_limits<double>::infinity();
    std::size_t segment = 0;
    double u = 0.0;
  };

  const auto search = [&](bool windowed) -> std::optional<Best> {
    Best best;
    bool found = false;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const TrajectoryPoint& a = pts[i];
      const TrajectoryPoint& b = pts[i + 1];
      if (windowed && (std::max(a.s, b.s) < *prev_s - kProjectionWindow ||
                       std::min(a.s, b.s) > *prev_s + kProjectionWindow)) {
        continue;
      }
      const double dx = b.x - a.x;
      const double dy = b.y - a.y;
      const double len2 = dx * dx + dy * dy;
      double u = 0.0;
      if (len2 > 0.0) {
        u = ((x - a.x) * dx + (y - a.y) * dy) / len2;
        u = std::clamp(u, 0.0, 1.0);
      }
      const double fx = a.x + u * dx;
      const double fy = a.y + u * dy;
      const double dist2 = (x - fx) * (x - fx) + (y - fy) * (y - fy);
      if (dist2 < best.dist2) {  // strict: ties keep the lower segment index
        best = Best{dist2, i, u};
        found = true;
      }
    }
    if (!found) {
      return std::nullopt;
    }
    return best;
  };

  std::optional<Best> best;
  if (prev_s) {
    best = search(true);
  }
  if (!best) {
    best = search(false);
  }
  return blend(pts[best->segment], pts[best->segment + 1], best->u, RefMode::kPath);
}

}  // namespace ftna
