#include "ftna/messages.hpp"

#include <cmath>

namespace ftna {

double wrap_angle(double a) {
  const double r = std::remainder(a, 2.0 * kPi);
  // remainder() yields [-pi, pi]; fold the single open-boundary case.
  return r <= -kPi ? r + 2.0 * kPi : r;
}

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kNone: return "NONE";
    case RejectReason::kStale: return "STALE";
    case RejectReason::kNonMonotonic: return "NON_MONOTONIC";
    case RejectReason::kNonFinite: return "NON_FINITE";
    case RejectReason::kEmpty: return "EMPTY";
    case RejectReason::kHorizonTooShort: return "HORIZON_TOO_SHORT";
    case RejectReason::kStatusInvalid: return "STATUS_INVALID";
  }
  return "UNKNOWN";
}

namespace {

bool point_finite(const TrajectoryPoint& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.theta) &&
         std::isfinite(p.kappa) && std::isfinite(p.s) && std::isfinite(p.v) &&
         std::isfinite(p.a) && std::isfinite(p.relative_time);
}

}  // namespace

ValidationResult validate_trajectory(const TrajectoryMsg& msg, double now,
                                     const WatchdogConfig& cfg) {
  if (msg.points.size() < 2) {
    return {false, RejectReason::kEmpty};
  }
  if (!std::isfinite(msg.timestamp)) {
    return {false, RejectReason::kNonFinite};
  }
  for (const TrajectoryPoint& p : msg.points) {
    if (!point_finite(p)) {
      return {false, RejectReason::kNonFinite};
    }
    if (p.v < 0.0) {
      return {false, RejectReason::kNonFinite};
    }
  }
  for (std::size_t i = 1; i < msg.points.size(); ++i) {
    if (!(msg.points[i].relative_time > msg.points[i - 1].relative_time) ||
        msg.points[i].s < msg.points[i - 1].s) {
      return {false, RejectReason::kNonMonotonic};
    }
  }
  if (now - msg.timestamp > cfg.traj_max_age) {
    return {false, RejectReason::kStale};
  }
  if (msg.forward_horizon_end() < now + cfg.min_forward_horizon) {
    return {false, RejectReason::kHorizonTooShort};
  }
  return {true, RejectReason::kNone};
}

ValidationResult validate_localization(const LocalizationMsg& msg, double now,
                                       const WatchdogConfig& cfg) {
  const bool finite = std::isfinite(msg.timestamp) && std::isfinite(msg.x) &&
                      std::isfinite(msg.y) && std::isfinite(msg.theta) &&
                      std::isfinite(msg.v) && std::isfinite(msg.yaw_rate) &&
                      std::isfinite(msg.a);
  if (!finite) {
    return {false, RejectReason::kNonFinite};
  }
  if (msg.status == kLocStatusInvalid) {
    return {false, RejectReason::kStatusInvalid};
  }
  if (now - msg.timestamp > cfg.loc_max_age) {
    return {false, RejectReason::kStale};
  }
  return {true, RejectReason::kNone};
}

}  // namespace ftna
