#include "ftna/mocks.hpp"

#include <algorithm>
#include <cmath>

namespace ftna {

const char* to_string(ScenarioShape shape) {
  switch (shape) {
    case ScenarioShape::kStraight: return "straight";
    case ScenarioShape::kArc: return "arc";
    case ScenarioShape::kLaneChange: return "lane_change";
    case ScenarioShape::kStop: return "stop";
    case ScenarioShape::kReverseStraight: return "reverse_straight";
  }
  return "unknown";
}

namespace {

constexpr double kLaneTableStep = 0.001;  // [m] in x
constexpr double kMaxReverseSpeed = 1.5;  // [m/s]

// Quintic lateral profile and its x-derivatives over the transition.
struct LaneEval {
  double y, dy, d2y;
};

LaneEval lane_eval(double x, double offset, double distance) {
  const double u = x / distance;
  const double u2 = u * u;
  const double u3 = u2 * u;
  LaneEval e;
  e.y = offset * (10.0 * u3 - 15.0 * u2 * u2 + 6.0 * u3 * u2);
  e.dy = offset * (30.0 * u2 - 60.0 * u3 + 30.0 * u2 * u2) / distance;
  e.d2y = offset * (60.0 * u - 180.0 * u2 + 120.0 * u3) / (distance * distance);
  return e;
}

}  // namespace

MockPlanner::MockPlanner(const ScenarioSpec& spec) : spec_(spec) {
  if (spec_.shape == ScenarioShape::kLaneChange) {
    // Fixed fine-grained cumulative arc length table over the transition, so
    // every replan interpolates the identical function of absolute position.
    lane_table_step_ = kLaneTableStep;
    const std::size_t n =
        static_cast<std::size_t>(std::ceil(spec_.lane_distance / lane_table_step_)) + 1;
    lane_s_table_.resize(n);
    lane_s_table_[0] = 0.0;
    const double dy0 = lane_eval(0.0, spec_.lane_offset, spec_.lane_distance).dy;
    double prev_f = std::sqrt(1.0 + dy0 * dy0);
    for (std::size_t i = 1; i < n; ++i) {
      const double x = std::min(i * lane_table_step_, spec_.lane_distance);
      const double dy = lane_eval(x, spec_.lane_offset, spec_.lane_distance).dy;
      const double f = std::sqrt(1.0 + dy * dy);
      lane_s_table_[i] =
          lane_s_table_[i - 1] + 0.5 * (prev_f + f) * lane_table_step_;
      prev_f = f;
    }
  }
}

double MockPlanner::lane_arc_length(double x) const {
  if (x <= 0.0) {
    return x;
  }
  if (x >= spec_.lane_distance) {
    return lane_s_table_.back() + (x - spec_.lane_distance);
  }
  const double pos = x / lane_table_step_;
  const std::size_t i = std::min(static_cast<std::size_t>(pos),
                                 lane_s_table_.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return lane_s_table_[i] + frac * (lane_s_table_[i + 1] - lane_s_table_[i]);
}

PathSample MockPlanner::sample_at(double t) const {
  PathSample p;
  switch (spec_.shape) {
    case ScenarioShape::kStraight: {
      p.x = spec_.speed * t;
      p.s = p.x;
      p.v = spec_.speed;
      break;
    }
    case ScenarioShape::kArc: {
      const double omega = spec_.speed / spec_.arc_radius;
      p.x = spec_.arc_radius * std::sin(omega * t);
      p.y = spec_.arc_radius * (1.0 - std::cos(omega * t));
      p.theta = wrap_angle(omega * t);
      p.kappa = 1.0 / spec_.arc_radius;
      p.s = spec_.speed * t;
      p.v = spec_.speed;
      break;
    }
    case ScenarioShape::kLaneChange: {
      p.x = spec_.speed * t;
      p.s = lane_arc_length(p.x);
      if (p.x <= 0.0) {
        p.v = spec_.speed;
      } else if (p.x >= spec_.lane_distance) {
        p.y = spec_.lane_offset;
        p.v = spec_.speed;
      } else {
        const LaneEval e = lane_eval(p.x, spec_.lane_offset, spec_.lane_distance);
        const double hyp = std::sqrt(1.0 + e.dy * e.dy);
        p.y = e.y;
        p.theta = std::atan(e.dy);
        p.kappa = e.d2y / (hyp * hyp * hyp);
        p.v = spec_.speed * hyp;
        p.a = spec_.speed * spec_.speed * e.dy * e.d2y / hyp;
      }
      break;
    }
    case ScenarioShape::kStop: {
      const double t_stop = spec_.speed / spec_.profile_decel;
      if (t < 0.0) {
        p.x = spec_.speed * t;
        p.v = spec_.speed;
      } else if (t < t_stop) {
        p.x = spec_.speed * t - 0.5 * spec_.profile_decel * t * t;
        p.v = spec_.speed - spec_.profile_decel * t;
        p.a = -spec_.profile_decel;
      } else {
        p.x = 0.5 * spec_.speed * spec_.speed / spec_.profile_decel;
        p.v = 0.0;
      }
      p.s = p.x;
      break;
    }
    case ScenarioShape::kReverseStraight: {
      const double vr = std::min(spec_.speed, kMaxReverseSpeed);
      p.x = -vr * t;
      p.s = vr * t;  // distance traveled while backing up
      p.v = vr;
      break;
    }
  }
  return p;
}

TrajectoryMsg MockPlanner::gen_trajectory(double now, const PlantState& /*ego*/) {
  TrajectoryMsg msg;
  msg.seq = ++next_seq_;
  msg.timestamp = now;
  msg.gear = gear();
  msg.mode_hint = spec_.mode_hint;
  const int n = static_cast<int>(std::llround(
                    (spec_.backward_horizon + spec_.forward_horizon) /
                    spec_.point_spacing)) +
                1;
  msg.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double tau = -spec_.backward_horizon + i * spec_.point_spacing;
    const PathSample s = sample_at(now + tau);
    TrajectoryPoint pt;
    pt.x = s.x;
    pt.y = s.y;
    pt.theta = s.theta;
    pt.kappa = s.kappa;
    pt.s = s.s;
    pt.v = s.v;
    pt.a = s.a;
    pt.relative_time = tau;
    msg.points.push_back(pt);
  }
  return msg;
}

std::optional<LocalizationMsg> MockLocalization::tick(const PlantState& truth,
                                                      double now,
                                                      std::mt19937_64& rng) {
  if (spec_.loc_dropout > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < spec_.loc_dropout) {
      return std::nullopt;
    }
  }
  LocalizationMsg msg;
  msg.seq = ++next_seq_;
  msg.timestamp = now - spec_.loc_latency;
  msg.x = truth.x;
  msg.y = truth.y;
  msg.theta = truth.theta;
  if (spec_.noise_xy > 0.0) {
    std::normal_distribution<double> n(0.0, spec_.noise_xy);
    msg.x += n(rng);
    msg.y += n(rng);
  }
  if (spec_.noise_theta > 0.0) {
    std::normal_distribution<double> n(0.0, spec_.noise_theta);
    msg.theta = wrap_angle(msg.theta + n(rng));
  }
  msg.v = truth.v;
  msg.yaw_rate = truth.v * std::tan(truth.delta_road) / wheelbase_;
  msg.a = truth.a_act;
  msg.status = kLocStatusOk;
  return msg;
}

}  // namespace ftna
