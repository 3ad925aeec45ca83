// Mocked planner and mocked localization. The planner samples an analytic
// reference profile anchored to absolute scenario time, so replans never
// reset the path and controller convergence is isolated from planner
// feedback. The localization mock emits plant ground truth plus configured
// imperfections (noise, dropout, latency).
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ftna/messages.hpp"
#include "ftna/vehicle_sim.hpp"

namespace ftna {

enum class ScenarioShape : std::uint8_t {
  kStraight = 0,
  kArc = 1,
  kLaneChange = 2,
  kStop = 3,
  kReverseStraight = 4,
};

const char* to_string(ScenarioShape shape);

struct ScenarioSpec {
  ScenarioShape shape = ScenarioShape::kStraight;
  double speed = 5.0;          // profile speed magnitude [m/s]
  double arc_radius = 20.0;    // [m], left turn
  double lane_offset = 3.5;    // [m], lane change lateral offset
  double lane_distance = 40.0; // [m], lane change transition distance
  double profile_decel = 1.0;  // [m/s^2], STOP shape deceleration
  double replan_period = 0.1;  // [s]
  double forward_horizon = 8.0;   // [s]
  double backward_horizon = 1.0;  // [s]
  double point_spacing = 0.1;     // [s] between trajectory samples
  std::uint8_t mode_hint = 0;

  double noise_xy = 0.0;      // [m], localization position noise sigma
  double noise_theta = 0.0;   // [rad], localization heading noise sigma
  double loc_dropout = 0.0;   // probability in [0,1)
  double loc_latency = 0.0;   // [s]
  double traj_drop = 0.0;     // trajectory datagram drop probability in [0,1)
};

// One sample of the analytic reference profile at absolute scenario time t.
struct PathSample {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double kappa = 0.0;
  double s = 0.0;  // arc length since scenario start, non-decreasing
  double v = 0.0;  // speed magnitude
  double a = 0.0;
};

class MockPlanner {
 public:
  explicit MockPlanner(const ScenarioSpec& spec);

  // Pure evaluation of the analytic profile; reused by tests as the oracle.
  PathSample sample_at(double t) const;

  std::int8_t gear() const {
    return spec_.shape == ScenarioShape::kReverseStraight ? -1 : 1;
  }

  // Samples [now - backward_horizon, now + forward_horizon] at the point
  // spacing. The ego pose is deliberately unused: plans anchor to the
  // analytic path, not the vehicle.
  TrajectoryMsg gen_trajectory(double now, const PlantState& ego);

 private:
  double lane_arc_length(double x) const;

  ScenarioSpec spec_;
  std::uint32_t next_seq_ = 0;
  std::vector<double> lane_s_table_;  // cumulative arc length over [0, lane_distance]
  double lane_table_step_ = 0.0;
};

class MockLocalization {
 public:
  MockLocalization(const ScenarioSpec& spec, double wheelbase)
      : spec_(spec), wheelbase_(wheelbase) {}

  // Emits truth plus noise at the caller's rate; returns nullopt on a
  // dropout draw. The message is stamped now - latency.
  std::optional<LocalizationMsg> tick(const PlantState& truth, double now,
                                      std::mt19937_64& rng);

 private:
  ScenarioSpec spec_;
  double wheelbase_ = 2.8;
  std::uint32_t next_seq_ = 0;
};

}  // namespace ftna
