// Domain message types shared by planner, controller, vehicle gateway and
// harness, plus the data/time validity checks that gate every control cycle.
#pragma once

#include <cstdint>
#include <vector>

namespace ftna {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Normalizes an angle to (-pi, pi]. Exact identity for inputs already in
// range; NaN passes through.
double wrap_angle(double a);

struct TrajectoryPoint {
  double x = 0.0;              // position east [m]
  double y = 0.0;              // position north [m]
  double theta = 0.0;          // heading [rad], normalized to (-pi, pi]
  double kappa = 0.0;          // curvature [1/m]
  double s = 0.0;              // arc length along trajectory [m]
  double v = 0.0;              // speed magnitude [m/s], >= 0
  double a = 0.0;              // acceleration [m/s^2]
  double relative_time = 0.0;  // offset from the trajectory timestamp [s]
};

// Sampled reference on a defined horizon. Within one message relative_time
// is strictly increasing and s is non-decreasing.
struct TrajectoryMsg {
  std::uint32_t seq = 0;
  double timestamp = 0.0;      // reference epoch on the common time base [s]
  std::int8_t gear = 1;        // +1 forward, -1 reverse
  std::uint8_t mode_hint = 0;  // 0 auto, 1 trajectory, 2 path
  std::vector<TrajectoryPoint> points;

  double forward_horizon_end() const {
    return points.empty() ? timestamp : timestamp + points.back().relative_time;
  }
  double backward_horizon_start() const {
    return points.empty() ? timestamp : timestamp + points.front().relative_time;
  }
};

inline constexpr std::uint8_t kLocStatusOk = 0;
inline constexpr std::uint8_t kLocStatusDegraded = 1;
inline constexpr std::uint8_t kLocStatusInvalid = 2;

// Timestamped pose/twist estimate; its timestamp is the system's common
// time base.
struct LocalizationMsg {
  std::uint32_t seq = 0;
  double timestamp = 0.0;  // measurement time [s]
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;      // [rad], normalized
  double v = 0.0;          // signed longitudinal speed [m/s]
  double yaw_rate = 0.0;   // [rad/s]
  double a = 0.0;          // longitudinal acceleration [m/s^2]
  std::uint8_t status = kLocStatusOk;
};

// Active controller mode ids, also used on the wire.
inline constexpr std::uint8_t kModeNone = 0;
inline constexpr std::uint8_t kModeTrajectory = 1;
inline constexpr std::uint8_t kModePath = 2;
inline constexpr std::uint8_t kModeStopRamp = 3;

// High-level command toward the vehicle gateway. throttle/brake/gear are
// only meaningful when direct_actuation is set (low-speed maneuvering).
struct ControlCommand {
  std::uint32_t seq = 0;
  double timestamp = 0.0;
  double accel_cmd = 0.0;       // requested longitudinal acceleration [m/s^2]
  double steer_wheel_cmd = 0.0; // steering wheel angle [rad]
  std::int8_t gear_cmd = 0;     // +1 / -1 / 0 neutral
  bool direct_actuation = false;
  double throttle = 0.0;        // [0,1]; throttle * brake == 0 always
  double brake = 0.0;           // [0,1]
  std::uint8_t mode = kModeNone;
};

inline constexpr std::uint8_t kHmiDisengage = 0;
inline constexpr std::uint8_t kHmiEngage = 1;
inline constexpr std::uint8_t kHmiEmergencyStop = 2;

struct HmiCommand {
  std::uint32_t seq = 0;
  double timestamp = 0.0;
  std::uint8_t command = kHmiDisengage;
};

// Per-cycle observability message from the controller toward the harness.
struct ControllerStatusMsg {
  std::uint32_t seq = 0;
  double timestamp = 0.0;
  std::uint8_t fsm = 0;
  std::uint8_t mode = kModeNone;
  std::uint8_t latch = 0;  // HandoverCause value, 0 when none
  double e_s = 0.0;
  double d = 0.0;
  double e_psi = 0.0;
  double e_v = 0.0;
};

enum class RejectReason : std::uint8_t {
  kNone = 0,
  kStale,
  kNonMonotonic,
  kNonFinite,
  kEmpty,
  kHorizonTooShort,
  kStatusInvalid,
};

const char* to_string(RejectReason reason);

struct ValidationResult {
  bool valid = false;
  RejectReason reason = RejectReason::kNone;
};

// Signal watchdog thresholds. Defaults tolerate a few dropped packets at the
// harness rates (planner 10 Hz, controller 100 Hz) without false handover.
struct WatchdogConfig {
  double traj_max_age = 0.5;         // [s]
  double loc_max_age = 0.1;          // [s]
  double min_forward_horizon = 1.0;  // [s]
};

// Consistency check of a trajectory message: per-point invariants, at least
// two points, message age, and remaining forward horizon. Rejection is
// expressed in the result, never by abort.
ValidationResult validate_trajectory(const TrajectoryMsg& msg, double now,
                                     const WatchdogConfig& cfg);

// Consistency check of a localization message: finite fields, status, age.
ValidationResult validate_localization(const LocalizationMsg& msg, double now,
                                       const WatchdogConfig& cfg);

}  // namespace ftna
