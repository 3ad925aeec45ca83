#include "ftna/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ftna {

FrenetError frenet_errors(const LocalizationMsg& pose, const ReferencePoint& ref,
                          std::int8_t gear) {
  const double dx = pose.x - ref.x;
  const double dy = pose.y - ref.y;
  const double sin_t = std::sin(ref.theta);
  const double cos_t = std::cos(ref.theta);
  FrenetError err;
  err.d = -sin_t * dx + cos_t * dy;
  err.e_s = ref.source_mode == RefMode::kPath ? 0.0 : cos_t * dx + sin_t * dy;
  err.e_psi = wrap_angle(pose.theta - ref.theta);
  err.d_dot = pose.v * std::sin(err.e_psi);
  err.e_v = static_cast<double>(gear) * ref.v - pose.v;
  return err;
}

double longitudinal_cmd(const FrenetError& err, const ReferencePoint& ref,
                        std::uint8_t mode, std::int8_t gear, const ControlGains& g) {
  switch (mode) {
    case kModeTrajectory:
      return ref.a - g.k_s * err.e_s + g.k_v * err.e_v;
    case kModeStopRamp:
      // Ramp deceleration feedforward on top of the path speed loop.
      return static_cast<double>(gear) * ref.a + g.k_v * err.e_v;
    default:
      return g.k_v * err.e_v;
  }
}

double lateral_cmd(const FrenetError& err, const ReferencePoint& ref,
                   std::int8_t gear, const ControlGains& g, const VehicleParams& p) {
  const double heading_sign = gear < 0 ? -1.0 : 1.0;
  const double kappa_cmd =
      ref.kappa - g.k_d * err.d - heading_sign * g.k_psi * err.e_psi;
  const double road_wheel = std::clamp(std::atan(p.wheelbase * kappa_cmd),
                                       -p.road_wheel_max, p.road_wheel_max);
  return p.steer_ratio * road_wheel;
}

double apply_limits(double raw, double prev, double min_value, double max_value,
                    double rate_limit, double dt) {
  if (dt <= 0.0) {
    throw std::invalid_argument("apply_limits: dt must be positive");
  }
  const double clamped = std::clamp(raw, min_value, max_value);
  return std::clamp(clamped, prev - rate_limit * dt, prev + rate_limit * dt);
}

ControlCommand control_step(const LocalizationMsg& loc, const ReferencePoint& ref,
                            std::uint8_t mode, std::int8_t gear,
                            const ControlGains& gains, const VehicleParams& params,
                            const ControlCommand& prev, double dt,
                            RawCommand* raw_out) {
  const FrenetError err = frenet_errors(loc, ref, gear);
  const double accel_raw = longitudinal_cmd(err, ref, mode, gear, gains);
  const double steer_raw = lateral_cmd(err, ref, gear, gains, params);
  if (raw_out) {
    *raw_out = RawCommand{accel_raw, steer_raw};
  }

  ControlCommand cmd;
  cmd.accel_cmd = apply_limits(accel_raw, prev.accel_cmd, params.accel_min,
                               params.accel_max, params.accel_rate, dt);
  cmd.steer_wheel_cmd =
      apply_limits(steer_raw, prev.steer_wheel_cmd, params.steer_wheel_max,
                   params.steer_wheel_rate, dt);
  cmd.gear_cmd = gear;
  cmd.mode = mode;

  const bool path_based = mode == kModePath || mode == kModeStopRamp;
  if (path_based && std::abs(loc.v) < params.direct_speed_threshold) {
    cmd.direct_actuation = true;
    // Map gear-relative acceleration to pedals: positive accelerates along
    // the gear direction, negative brakes.
    const double a_rel = static_cast<double>(gear) * cmd.accel_cmd;
    if (a_rel >= 0.0) {
      cmd.throttle = std::clamp(a_rel / 2.0, 0.0, 1.0);
      cmd.brake = 0.0;
    } else {
      cmd.throttle = 0.0;
      cmd.brake = std::clamp(-a_rel / 4.0, 0.0, 1.0);
    }
  }
  return cmd;
}

}  // namespace ftna
