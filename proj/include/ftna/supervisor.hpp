// Finite state automaton that activates and parametrizes the controller,
// selects trajectory vs path mode from the received trajectory, runs the
// signal watchdogs, and ceases actuation (simulated safety-driver handover)
// on any error.
#pragma once

#include <cstdint>
#include <optional>

#include "ftna/control.hpp"
#include "ftna/messages.hpp"
#include "ftna/reference.hpp"

namespace ftna {

enum class FsmState : std::uint8_t {
  kInactive = 0,
  kEngagedTrajectory = 1,
  kEngagedPath = 2,
  kDegradedStop = 3,
  kHandover = 4,
};

const char* to_string(FsmState state);

enum class HandoverCause : std::uint8_t {
  kNone = 0,
  kLocalizationInvalid,
  kActuatorFault,
  kEmergencyStop,
  kHorizonExpired,
  kStopComplete,
};

const char* to_string(HandoverCause cause);

struct SupervisorConfig {
  WatchdogConfig watchdog{};
  double cycle_dt = 0.01;             // [s]
  double path_speed_threshold = 2.0;  // [m/s], select_mode rule
  double stop_decel = 2.0;            // [m/s^2], degraded stop ramp
  double stop_margin = 2.0;           // [s] on top of the ramp time
  double stopped_speed_eps = 0.05;    // [m/s], "vehicle stopped"
};

// Pure mode rule over one trajectory message: path for reverse gear
// (dominant), an explicit path hint, or a slow maneuvering profile; an
// explicit trajectory hint forces trajectory mode otherwise.
std::uint8_t select_mode(const TrajectoryMsg& traj, double speed_threshold);

// Condition flags for one FSM step, precomputed by the supervisor cycle.
struct FsmInputs {
  bool engage = false;
  bool disengage = false;
  bool emergency_stop = false;
  bool loc_ok = false;
  bool traj_usable = false;    // a stored trajectory exists to track
  bool horizon_low = false;    // remaining time horizon below stop threshold
  bool stop_feasible = false;  // a ramp to zero still fits the horizon
  bool vehicle_stopped = false;
  bool actuator_fault = false;
  std::uint8_t selected_mode = kModeTrajectory;  // from select_mode
};

struct Directive {
  bool actuate = false;
  std::uint8_t mode = kModeNone;
};

struct FsmResult {
  FsmState next = FsmState::kInactive;
  Directive directive{};
  HandoverCause cause = HandoverCause::kNone;
};

// Total transition function: every (state, inputs) pair maps to a defined
// successor, and the directive never actuates into INACTIVE or HANDOVER.
FsmResult fsm_step(FsmState state, const FsmInputs& in);

// Owns the 10 ms control cycle: accepts the freshest mailbox contents,
// validates, steps the FSM, invokes the control law, and reports everything
// the recorder needs.
class Supervisor {
 public:
  Supervisor() = default;
  Supervisor(SupervisorConfig cfg, ControlGains gains, VehicleParams params)
      : cfg_(cfg), gains_(gains), params_(params) {}

  struct Input {
    double now = 0.0;
    std::optional<TrajectoryMsg> trajectory;
    std::optional<LocalizationMsg> localization;
    std::optional<HmiCommand> hmi;
    bool actuator_fault = false;  // simulated vehicle-interface fault flag
  };

  struct Output {
    FsmState state = FsmState::kInactive;
    Directive directive{};
    std::optional<ControlCommand> command;  // engaged cycles only
    ControllerStatusMsg status{};
    HandoverCause cause = HandoverCause::kNone;
    bool loc_ok = false;
    bool traj_ok = false;
    std::optional<LocalizationMsg> used_localization;
    std::optional<ReferencePoint> ref;
    std::optional<FrenetError> errors;
    RawCommand raw{};
    ValidationResult traj_validation{true, RejectReason::kNone};
    ValidationResult loc_validation{true, RejectReason::kNone};
  };

  Output cycle(const Input& in);

  FsmState state() const { return state_; }
  const TrajectoryStore& store() const { return store_; }
  const SupervisorConfig& config() const { return cfg_; }

 private:
  SupervisorConfig cfg_{};
  ControlGains gains_{};
  VehicleParams params_{};

  FsmState state_ = FsmState::kInactive;
  TrajectoryStore store_;
  std::optional<LocalizationMsg> last_loc_;
  ControlCommand prev_cmd_{};
  std::optional<double> prev_proj_s_;
  HandoverCause latch_ = HandoverCause::kNone;
  double stop_entry_time_ = 0.0;
  double stop_entry_speed_ = 0.0;
  std::uint32_t cmd_seq_ = 0;
  std::uint32_t status_seq_ = 0;
};

}  // namespace ftna
