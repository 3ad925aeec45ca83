#include "ftna/supervisor.hpp"

#include <algorithm>
#include <cmath>

namespace ftna {

const char* to_string(FsmState state) {
  switch (state) {
    case FsmState::kInactive: return "INACTIVE";
    case FsmState::kEngagedTrajectory: return "ENGAGED_TRAJECTORY";
    case FsmState::kEngagedPath: return "ENGAGED_PATH";
    case FsmState::kDegradedStop: return "DEGRADED_STOP";
    case FsmState::kHandover: return "HANDOVER";
  }
  return "UNKNOWN";
}

const char* to_string(HandoverCause cause) {
  switch (cause) {
    case HandoverCause::kNone: return "NONE";
    case HandoverCause::kLocalizationInvalid: return "LOCALIZATION_INVALID";
    case HandoverCause::kActuatorFault: return "ACTUATOR_FAULT";
    case HandoverCause::kEmergencyStop: return "EMERGENCY_STOP";
    case HandoverCause::kHorizonExpired: return "HORIZON_EXPIRED";
    case HandoverCause::kStopComplete: return "STOP_COMPLETE";
  }
  return "UNKNOWN";
}

std::uint8_t select_mode(const TrajectoryMsg& traj, double speed_threshold) {
  if (traj.gear == -1) {
    return kModePath;  // reverse gear dominates every hint
  }
  if (traj.mode_hint == kModeTrajectory) {
    return kModeTrajectory;
  }
  if (traj.mode_hint == kModePath) {
    return kModePath;
  }
  double max_v = 0.0;
  for (const TrajectoryPoint& p : traj.points) {
    max_v = std::max(max_v, p.v);
  }
  return max_v < speed_threshold ? kModePath : kModeTrajectory;
}

namespace {

FsmState engaged_state(std::uint8_t mode) {
  return mode == kModePath ? FsmState::kEngagedPath : FsmState::kEngagedTrajectory;
}

FsmResult stay(FsmState s) { return {s, {false, kModeNone}, HandoverCause::kNone}; }

FsmResult engage(std::uint8_t mode) {
  return {engaged_state(mode), {true, mode}, HandoverCause::kNone};
}

FsmResult handover(HandoverCause cause) {
  return {FsmState::kHandover, {false, kModeNone}, cause};
}

}  // namespace

FsmResult fsm_step(FsmState state, const FsmInputs& in) {
  // HMI requests take precedence in every state; an emergency stop beats a
  // simultaneous disengage.
  if (in.emergency_stop) {
    return handover(HandoverCause::kEmergencyStop);
  }
  if (in.disengage) {
    return stay(FsmState::kInactive);
  }

  switch (state) {
    case FsmState::kInactive:
      if (in.engage && in.loc_ok && in.traj_usable && !in.horizon_low &&
          !in.actuator_fault) {
        return engage(in.selected_mode);
      }
      return stay(FsmState::kInactive);

    case FsmState::kEngagedTrajectory:
    case FsmState::kEngagedPath:
      if (!in.loc_ok) {
        return handover(HandoverCause::kLocalizationInvalid);
      }
      if (in.actuator_fault) {
        return handover(HandoverCause::kActuatorFault);
      }
      if (!in.traj_usable) {
        return handover(HandoverCause::kHorizonExpired);
      }
      if (in.horizon_low) {
        if (in.stop_feasible) {
          return {FsmState::kDegradedStop, {true, kModeStopRamp}, HandoverCause::kNone};
        }
        return handover(HandoverCause::kHorizonExpired);
      }
      return engage(in.selected_mode);

    case FsmState::kDegradedStop:
      if (!in.loc_ok) {
        return handover(HandoverCause::kLocalizationInvalid);
      }
      if (in.actuator_fault) {
        return handover(HandoverCause::kActuatorFault);
      }
      if (in.vehicle_stopped) {
        return handover(HandoverCause::kStopComplete);
      }
      if (in.traj_usable && !in.horizon_low) {
        return engage(in.selected_mode);  // planner recovered
      }
      return {FsmState::kDegradedStop, {true, kModeStopRamp}, HandoverCause::kNone};

    case FsmState::kHandover:
      // Absorbing until an explicit DISENGAGE (handled above) + ENGAGE cycle.
      return stay(FsmState::kHandover);
  }
  return stay(FsmState::kInactive);
}

Supervisor::Output Supervisor::cycle(const Input& in) {
  Output out;

  if (in.trajectory) {
    out.traj_validation = validate_trajectory(*in.trajectory, in.now, cfg_.watchdog);
    store_.update(*in.trajectory, in.now, cfg_.watchdog);
  }
  if (in.localization) {
    out.loc_validation = validate_localization(*in.localization, in.now, cfg_.watchdog);
    if (out.loc_validation.valid) {
      last_loc_ = *in.localization;
    }
  }

  // Freshness of the last accepted localization, re-checked every cycle.
  out.loc_ok = last_loc_.has_value() &&
               in.now - last_loc_->timestamp <= cfg_.watchdog.loc_max_age;
  out.used_localization = last_loc_;

  FsmInputs flags;
  flags.loc_ok = out.loc_ok;
  flags.actuator_fault = in.actuator_fault;
  if (in.hmi) {
    flags.engage = in.hmi->command == kHmiEngage;
    flags.disengage = in.hmi->command == kHmiDisengage;
    flags.emergency_stop = in.hmi->command == kHmiEmergencyStop;
  }

  const double speed = out.loc_ok ? std::abs(last_loc_->v) : 0.0;
  flags.vehicle_stopped = speed < cfg_.stopped_speed_eps;
  if (!store_.empty()) {
    const TrajectoryMsg& traj = store_.current();
    flags.traj_usable = true;
    flags.selected_mode = select_mode(traj, cfg_.path_speed_threshold);
    const double remaining = traj.forward_horizon_end() - in.now;
    const double time_to_stop = speed / cfg_.stop_decel;
    flags.horizon_low = remaining < time_to_stop + cfg_.stop_margin;
    flags.stop_feasible = remaining >= time_to_stop;
  }
  out.traj_ok = flags.traj_usable;

  const FsmResult result = fsm_step(state_, flags);

  if (result.next == FsmState::kDegradedStop && state_ != FsmState::kDegradedStop) {
    stop_entry_time_ = in.now;
    stop_entry_speed_ = speed;
  }
  if (result.cause != HandoverCause::kNone) {
    latch_ = result.cause;
  } else if (result.next == FsmState::kInactive) {
    latch_ = HandoverCause::kNone;
  }

  out.directive = result.directive;
  out.cause = latch_;

  if (result.directive.actuate) {
    const TrajectoryMsg& traj = store_.current();
    std::optional<ReferencePoint> ref;
    if (result.directive.mode == kModeTrajectory) {
      ref = ref_by_time(traj, in.now);
    } else {
      ref = ref_by_projection(traj, last_loc_->x, last_loc_->y, prev_proj_s_);
      if (ref) {
        prev_proj_s_ = ref->s;
      }
    }
    if (result.directive.mode == kModeStopRamp && ref) {
      const double ramp_v =
          std::max(0.0, stop_entry_speed_ -
                            cfg_.stop_decel * (in.now - stop_entry_time_));
      ref->v = ramp_v;
      ref->a = ramp_v > 0.0 ? -cfg_.stop_decel : 0.0;
    }
    if (!ref) {
      // Interpolation outside the horizon means the watchdog bookkeeping was
      // violated; cease actuation immediately.
      state_ = FsmState::kHandover;
      latch_ = HandoverCause::kHorizonExpired;
      out.cause = latch_;
      out.directive = {false, kModeNone};
      prev_cmd_ = ControlCommand{};
      prev_proj_s_.reset();
    } else {
      out.ref = *ref;
      ControlCommand cmd =
          control_step(*last_loc_, *ref, result.directive.mode, traj.gear, gains_,
                       params_, prev_cmd_, cfg_.cycle_dt, &out.raw);
      cmd.seq = ++cmd_seq_;
      cmd.timestamp = in.now;
      out.errors = frenet_errors(*last_loc_, *ref, traj.gear);
      out.command = cmd;
      prev_cmd_ = cmd;
      state_ = result.next;
    }
  } else {
    prev_cmd_ = ControlCommand{};
    prev_proj_s_.reset();
    state_ = result.next;
  }

  out.state = state_;
  out.status.seq = ++status_seq_;
  out.status.timestamp = in.now;
  out.status.fsm = static_cast<std::uint8_t>(state_);
  out.status.mode = out.directive.mode;
  out.status.latch = static_cast<std::uint8_t>(latch_);
  if (out.errors) {
    out.status.e_s = out.errors->e_s;
    out.status.d = out.errors->d;
    out.status.e_psi = out.errors->e_psi;
    out.status.e_v = out.errors->e_v;
  }
  return out;
}

}  // namespace ftna
