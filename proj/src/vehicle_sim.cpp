#include "ftna/vehicle_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ftna {

double first_order_step(double current, double setpoint, double tau, double dt) {
  if (tau <= 0.0) {
    return setpoint;
  }
  return current + (setpoint - current) * -std::expm1(-dt / tau);
}

void VehicleSim::set_command(const ControlCommand& cmd) {
  state_.gear = cmd.gear_cmd;
  steer_setpoint_ = std::clamp(cmd.steer_wheel_cmd / params_.steer_ratio,
                               -params_.road_wheel_max, params_.road_wheel_max);
  if (cmd.direct_actuation) {
    const double gear = static_cast<double>(cmd.gear_cmd);
    accel_setpoint_ = gear * (2.0 * cmd.throttle - 4.0 * cmd.brake);
  } else {
    accel_setpoint_ = cmd.accel_cmd;
  }
  accel_setpoint_ = std::clamp(accel_setpoint_, params_.accel_min, params_.accel_max);
}

namespace {

struct Deriv {
  double dx, dy, dtheta, dv;
};

Deriv bicycle(double theta, double v, double delta, double a, double wheelbase) {
  return {v * std::cos(theta), v * std::sin(theta),
          v * std::tan(delta) / wheelbase, a};
}

}  // namespace

void VehicleSim::step(double dt) {
  if (dt <= 0.0) {
    throw std::invalid_argument("VehicleSim::step: dt must be positive");
  }
  if (!fault_) {
    state_.delta_road =
        std::clamp(first_order_step(state_.delta_road, steer_setpoint_,
                                    actuators_.tau_steer, dt),
                   -params_.road_wheel_max, params_.road_wheel_max);
    state_.a_act =
        std::clamp(first_order_step(state_.a_act, accel_setpoint_,
                                    actuators_.tau_accel, dt),
                   params_.accel_min, params_.accel_max);
  }

  const int substeps = std::max(1, static_cast<int>(std::llround(dt / 0.001)));
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    const double x = state_.x, y = state_.y, th = state_.theta, v = state_.v;
    const Deriv k1 = bicycle(th, v, state_.delta_road, state_.a_act, params_.wheelbase);
    const Deriv k2 = bicycle(th + 0.5 * h * k1.dtheta, v + 0.5 * h * k1.dv,
                             state_.delta_road, state_.a_act, params_.wheelbase);
    const Deriv k3 = bicycle(th + 0.5 * h * k2.dtheta, v + 0.5 * h * k2.dv,
                             state_.delta_road, state_.a_act, params_.wheelbase);
    const Deriv k4 = bicycle(th + h * k3.dtheta, v + h * k3.dv, state_.delta_road,
                             state_.a_act, params_.wheelbase);
    state_.x = x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    state_.y = y + h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    state_.theta = wrap_angle(
        th + h / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta));
    const double v_new = v + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    // Braking must not push the speed through zero into the opposite
    // direction of motion, and from standstill the vehicle only starts
    // moving along the selected gear direction.
    if (v != 0.0 && v * v_new < 0.0 && state_.a_act * v < 0.0) {
      state_.v = 0.0;
    } else if (v == 0.0 && state_.a_act * static_cast<double>(state_.gear) < 0.0) {
      state_.v = 0.0;
    } else {
      state_.v = v_new;
    }
  }
}

}  // namespace ftna
