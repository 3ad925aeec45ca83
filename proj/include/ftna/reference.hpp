// Stores the latest valid trajectory and produces the tracking reference
// point, either by time interpolation (trajectory mode) or by closest-point
// projection onto the polyline (path mode).
#pragma once

#include <cstdint>
#include <optional>

#include "ftna/messages.hpp"

namespace ftna {

enum class RefMode : std::uint8_t {
  kTrajectory = 1,  // interpolated by time
  kPath = 2,        // projected by closest Euclidean distance
};

struct ReferencePoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double kappa = 0.0;
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  RefMode source_mode = RefMode::kTrajectory;
};

// Holds the most recent accepted trajectory. Updated only from the control
// cycle; queries are pure.
class TrajectoryStore {
 public:
  // Replaces the stored trajectory iff msg passes validation and carries a
  // higher seq than the stored one (or the store is empty).
  bool update(const TrajectoryMsg& msg, double now, const WatchdogConfig& cfg);

  bool empty() const { return !current_.has_value(); }
  const TrajectoryMsg& current() const { return *current_; }
  double received_at() const { return received_at_; }
  void clear();

 private:
  std::optional<TrajectoryMsg> current_;
  double received_at_ = 0.0;
};

// Once a projection match exists, the search is restricted to this arc
// length window around it so self-intersecting paths cannot flip branches.
inline constexpr double kProjectionWindow = 20.0;  // [m]

// Linear interpolation at time t on the trajectory (theta on the shortest
// angular arc, exact sample returned on a sample hit). Returns nullopt when
// t - timestamp falls outside [first, last] relative_time: the backward or
// forward horizon contract was violated.
std::optional<ReferencePoint> ref_by_time(const TrajectoryMsg& traj, double t);

// Foot point of (x, y) on the trajectory polyline with global minimum
// distance; ties go to the lower segment index. Works with uneven point
// spacing and zero-length segments. prev_s, when given, applies the
// +-kProjectionWindow hysteresis window (falls back to a full search when
// the window misses the trajectory).
ReferencePoint ref_by_projection(const TrajectoryMsg& traj, double x, double y,
                                 std::optional<double> prev_s = std::nullopt);

}  // namespace ftna
