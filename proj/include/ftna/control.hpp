// Frenet-frame tracking errors, the longitudinal and lateral control laws,
// and the absolute/rate limiting of every command signal.
//
// The law is a cascaded PD with feedforward: acceleration from station and
// speed errors, steering from a curvature command mapped through the
// kinematic bicycle and the steering ratio. In reverse gear the heading
// error feedback changes sign (lateral stiffness keeps its sign; flipping
// it destabilizes backward motion).
#pragma once

#include "ftna/messages.hpp"
#include "ftna/reference.hpp"

namespace ftna {

struct FrenetError {
  double e_s = 0.0;    // station error, > 0 when the vehicle is ahead [m]
  double d = 0.0;      // lateral error, > 0 left of the reference tangent [m]
  double e_psi = 0.0;  // heading error, normalized [rad]
  double d_dot = 0.0;  // lateral error rate v*sin(e_psi) [m/s]
  double e_v = 0.0;    // speed error, gear-signed reference minus measured [m/s]
};

struct ControlGains {
  double k_s = 0.5;    // station feedback [1/s^2]
  double k_v = 1.0;    // speed feedback [1/s]
  double k_d = 0.12;   // lateral feedback [1/m^2]
  double k_psi = 0.9;  // heading feedback [1/m]
};

struct VehicleParams {
  double wheelbase = 2.8;        // [m]
  double steer_ratio = 14.0;     // steering wheel angle / road wheel angle
  double accel_min = -4.0;       // [m/s^2]
  double accel_max = 2.0;        // [m/s^2]
  double accel_rate = 5.0;       // [m/s^3]
  double steer_wheel_max = 7.85; // [rad], +-450 deg
  double steer_wheel_rate = 6.0; // [rad/s]
  double road_wheel_max = 0.6;   // [rad]
  double direct_speed_threshold = 2.0;  // [m/s], direct actuation below this
};

// In path mode (projection references) e_s is defined as 0.
FrenetError frenet_errors(const LocalizationMsg& pose, const ReferencePoint& ref,
                          std::int8_t gear);

// Trajectory mode: a_ref - k_s*e_s + k_v*e_v. Path mode: k_v*e_v, which with
// the gear-signed e_v equals k_v*(v_path - v). The stop ramp adds the ramp
// deceleration of the reference as feedforward.
double longitudinal_cmd(const FrenetError& err, const ReferencePoint& ref,
                        std::uint8_t mode, std::int8_t gear, const ControlGains& g);

// kappa_cmd = kappa_ref - k_d*d -+ k_psi*e_psi (sign flipped in reverse),
// mapped to a road wheel angle through atan(L*kappa), clamped, and scaled by
// the steering ratio.
double lateral_cmd(const FrenetError& err, const ReferencePoint& ref,
                   std::int8_t gear, const ControlGains& g, const VehicleParams& p);

// clamp(raw, min..max), then clamp to prev +- rate_limit*dt.
double apply_limits(double raw, double prev, double min_value, double max_value,
                    double rate_limit, double dt);

inline double apply_limits(double raw, double prev, double abs_limit,
                           double rate_limit, double dt) {
  return apply_limits(raw, prev, -abs_limit, abs_limit, rate_limit, dt);
}

struct RawCommand {
  double accel = 0.0;
  double steer_wheel = 0.0;
};

// One 10 ms control computation: errors -> laws -> limits -> command fields.
// Stateless apart from prev (the previously emitted command, for rate
// limiting); calling twice with equal arguments yields equal commands.
// Direct actuation (throttle/brake/gear) engages only in path-based modes
// below the direct speed threshold.
ControlCommand control_step(const LocalizationMsg& loc, const ReferencePoint& ref,
                            std::uint8_t mode, std::int8_t gear,
                            const ControlGains& gains, const VehicleParams& params,
                            const ControlCommand& prev, double dt,
                            RawCommand* raw_out = nullptr);

}  // namespace ftna
