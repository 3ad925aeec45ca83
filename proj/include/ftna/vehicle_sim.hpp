// Stands in for the vehicle gateway and plant: consumes control commands,
// applies first-order actuator dynamics and physical limits, and integrates
// a kinematic bicycle model with RK4 substeps. Ground truth is exposed
// in-process for the mocked localization.
#pragma once

#include <cstdint>

#include "ftna/control.hpp"
#include "ftna/messages.hpp"

namespace ftna {

struct PlantState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;       // [rad], normalized
  double v = 0.0;           // signed longitudinal speed [m/s]
  double delta_road = 0.0;  // actual road wheel angle [rad]
  double a_act = 0.0;       // actual longitudinal acceleration [m/s^2]
  std::int8_t gear = 1;
};

struct ActuatorModel {
  double tau_steer = 0.1;  // steering first-order time constant [s]
  double tau_accel = 0.2;  // acceleration first-order time constant [s]
};

// Exact discrete first-order lag update over one step of length dt.
double first_order_step(double current, double setpoint, double tau, double dt);

class VehicleSim {
 public:
  VehicleSim() = default;
  VehicleSim(PlantState init, ActuatorModel actuators, VehicleParams params)
      : state_(init), actuators_(actuators), params_(params) {}

  // Gateway side: converts the high-level command into actuator setpoints.
  // Steering wheel angle maps through 1/steer_ratio; under direct actuation
  // throttle/brake map back to a gear-relative acceleration (the inverse of
  // the controller's pedal map).
  void set_command(const ControlCommand& cmd);

  // Advances actuators (first-order lag toward setpoints, clamped to the
  // physical range) and integrates the bicycle model with 1 ms RK4 substeps.
  // A set fault freezes both actuators in place. Speed is clamped at zero
  // when braking through it, in either gear direction.
  void step(double dt);

  const PlantState& state() const { return state_; }
  PlantState& mutable_state() { return state_; }

  void set_fault(bool fault) { fault_ = fault; }
  bool actuator_fault() const { return fault_; }

  double steer_setpoint() const { return steer_setpoint_; }
  double accel_setpoint() const { return accel_setpoint_; }

 private:
  PlantState state_{};
  ActuatorModel actuators_{};
  VehicleParams params_{};
  double steer_setpoint_ = 0.0;  // road wheel angle [rad]
  double accel_setpoint_ = 0.0;  // [m/s^2]
  bool fault_ = false;
};

}  // namespace ftna
