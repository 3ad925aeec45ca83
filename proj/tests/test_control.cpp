#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ftna/control.hpp"

using namespace ftna;

namespace {

ReferencePoint straight_ref(double x, double v, RefMode mode = RefMode::kTrajectory) {
  ReferencePoint ref;
  ref.x = x;
  ref.v = v;
  ref.source_mode = mode;
  return ref;
}

LocalizationMsg pose_at(double x, double y, double theta, double v) {
  LocalizationMsg loc;
  loc.x = x;
  loc.y = y;
  loc.theta = theta;
  loc.v = v;
  return loc;
}

}  // namespace

TEST_CASE("frenet identity: a pose on the reference has zero errors") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_real_distribution<double> ang(-kPi + 1e-9, kPi);
  for (int i = 0; i < 200; ++i) {
    ReferencePoint ref;
    ref.x = u(rng);
    ref.y = u(rng);
    ref.theta = ang(rng);
    ref.v = std::abs(u(rng)) / 5.0;
    const auto pose = pose_at(ref.x, ref.y, ref.theta, ref.v);
    const FrenetError e = frenet_errors(pose, ref, 1);
    CHECK(e.e_s == doctest::Approx(0.0));
    CHECK(e.d == doctest::Approx(0.0));
    CHECK(e.e_psi == doctest::Approx(0.0));
    CHECK(e.d_dot == doctest::Approx(0.0));
    CHECK(e.e_v == doctest::Approx(0.0));
  }
}

TEST_CASE("frenet errors against an axis-aligned reference") {
  const auto ref = straight_ref(5.0, 1.0);
  const auto pose = pose_at(5.0, 0.5, 0.1, 1.0);
  const FrenetError e = frenet_errors(pose, ref, 1);
  CHECK(e.d == doctest::Approx(0.5));
  CHECK(e.e_s == doctest::Approx(0.0));
  CHECK(e.e_psi == doctest::Approx(0.1));
  CHECK(e.d_dot == doctest::Approx(0.09983341664682815));
  CHECK(e.e_v == doctest::Approx(0.0));
}

TEST_CASE("frenet heading error wraps across the pi boundary") {
  ReferencePoint ref;
  ref.theta = kPi;
  const auto pose = pose_at(0.0, 0.0, -kPi + 0.05, 0.0);
  const FrenetError e = frenet_errors(pose, ref, 1);
  CHECK(e.e_psi == doctest::Approx(0.05));
}

TEST_CASE("station error sign convention") {
  // vehicle 2 m ahead of the reference along its tangent
  const auto ref = straight_ref(0.0, 1.0);
  const auto pose = pose_at(2.0, 0.0, 0.0, 1.0);
  CHECK(frenet_errors(pose, ref, 1).e_s == doctest::Approx(2.0));
  // path mode removes the station error by construction
  const auto path_ref = straight_ref(0.0, 1.0, RefMode::kPath);
  CHECK(frenet_errors(pose, path_ref, 1).e_s == 0.0);
}

TEST_CASE("longitudinal command") {
  const ControlGains g;

  SUBCASE("pure feedforward at zero error") {
    ReferencePoint ref;
    ref.a = 0.7;
    CHECK(longitudinal_cmd(FrenetError{}, ref, kModeTrajectory, 1, g) ==
          doctest::Approx(0.7));
  }
  SUBCASE("station feedback opposes running ahead") {
    FrenetError e;
    e.e_s = 2.0;
    e.e_v = 1.0;
    ReferencePoint ref;
    // -k_s * 2 + k_v * 1 with the default gains
    CHECK(longitudinal_cmd(e, ref, kModeTrajectory, 1, g) ==
          doctest::Approx(-g.k_s * 2.0 + g.k_v * 1.0));
    e.e_v = 0.0;
    CHECK(longitudinal_cmd(e, ref, kModeTrajectory, 1, g) < 0.0);
  }
  SUBCASE("path mode tracks the reference speed only") {
    FrenetError e;
    e.e_v = 0.0;
    ReferencePoint ref;
    ref.v = 3.0;
    CHECK(longitudinal_cmd(e, ref, kModePath, 1, g) == 0.0);
    e.e_v = -0.5;
    CHECK(longitudinal_cmd(e, ref, kModePath, 1, g) == doctest::Approx(-0.5));
  }
  SUBCASE("stop ramp adds the ramp deceleration feedforward") {
    FrenetError e;
    ReferencePoint ref;
    ref.a = -2.0;
    CHECK(longitudinal_cmd(e, ref, kModeStopRamp, 1, g) == doctest::Approx(-2.0));
    CHECK(longitudinal_cmd(e, ref, kModeStopRamp, -1, g) == doctest::Approx(2.0));
  }
}

TEST_CASE("lateral command") {
  const ControlGains g;
  const VehicleParams p;

  SUBCASE("zero on a straight at zero error") {
    CHECK(lateral_cmd(FrenetError{}, ReferencePoint{}, 1, g, p) == 0.0);
  }
  SUBCASE("circle feedforward") {
    ReferencePoint ref;
    ref.kappa = 1.0 / 20.0;
    const double expected = 14.0 * std::atan(2.8 / 20.0);
    CHECK(lateral_cmd(FrenetError{}, ref, 1, g, p) == doctest::Approx(expected));
    CHECK(expected == doctest::Approx(1.9473431807489983));
  }
  SUBCASE("left offset steers right") {
    FrenetError e;
    e.d = 1.0;
    CHECK(lateral_cmd(e, ReferencePoint{}, 1, g, p) < 0.0);
  }
  SUBCASE("road wheel angle saturates before scaling") {
    FrenetError e;
    e.d = 100.0;
    CHECK(lateral_cmd(e, ReferencePoint{}, 1, g, p) ==
          doctest::Approx(-p.steer_ratio * p.road_wheel_max));
  }
  SUBCASE("reverse flips the heading feedback only") {
    FrenetError e;
    e.d = 1.0;
    const double fwd = lateral_cmd(e, ReferencePoint{}, 1, g, p);
    const double rev = lateral_cmd(e, ReferencePoint{}, -1, g, p);
    CHECK(fwd == rev);  // lateral stiffness keeps its sign

    e.d = 0.0;
    e.e_psi = 0.2;
    const double fwd_psi = lateral_cmd(e, ReferencePoint{}, 1, g, p);
    const double rev_psi = lateral_cmd(e, ReferencePoint{}, -1, g, p);
    CHECK(fwd_psi == doctest::Approx(-rev_psi));
    CHECK(fwd_psi < 0.0);
    CHECK(rev_psi > 0.0);
  }
}

TEST_CASE("apply_limits") {
  SUBCASE("rate bound from rest") {
    CHECK(apply_limits(5.0, 0.0, 10.0, 2.0, 0.01) == doctest::Approx(0.02));
    CHECK(apply_limits(-5.0, 0.0, 10.0, 2.0, 0.01) == doctest::Approx(-0.02));
  }
  SUBCASE("identity within all bounds") {
    CHECK(apply_limits(0.1, 0.095, 10.0, 2.0, 0.01) == 0.1);
  }
  SUBCASE("absolute bound") {
    CHECK(apply_limits(-10.0, -4.0, 4.0, 100.0, 0.01) == doctest::Approx(-4.0));
  }
  SUBCASE("asymmetric bounds") {
    CHECK(apply_limits(3.0, 2.0, -4.0, 2.0, 100.0, 0.01) == doctest::Approx(2.0));
    CHECK(apply_limits(-10.0, -3.95, -4.0, 2.0, 100.0, 0.01) == doctest::Approx(-4.0));
  }
  SUBCASE("dt must be positive") {
    CHECK_THROWS_AS(apply_limits(1.0, 0.0, 1.0, 1.0, 0.0), std::invalid_argument);
  }
}

TEST_CASE("control_step") {
  const ControlGains g;
  const VehicleParams p;

  SUBCASE("perfect tracking yields a neutral command") {
    const auto ref = straight_ref(3.0, 5.0);
    const auto loc = pose_at(3.0, 0.0, 0.0, 5.0);
    const auto cmd = control_step(loc, ref, kModeTrajectory, 1, g, p, {}, 0.01);
    CHECK(cmd.accel_cmd == 0.0);
    CHECK(cmd.steer_wheel_cmd == 0.0);
    CHECK(cmd.gear_cmd == 1);
    CHECK(cmd.mode == kModeTrajectory);
    CHECK_FALSE(cmd.direct_actuation);
  }
  SUBCASE("same state twice gives the identical command") {
    const auto ref = straight_ref(3.0, 5.0);
    const auto loc = pose_at(3.2, 0.4, 0.05, 4.8);
    ControlCommand prev;
    prev.accel_cmd = 0.1;
    prev.steer_wheel_cmd = -0.2;
    RawCommand raw1, raw2;
    const auto c1 = control_step(loc, ref, kModeTrajectory, 1, g, p, prev, 0.01, &raw1);
    const auto c2 = control_step(loc, ref, kModeTrajectory, 1, g, p, prev, 0.01, &raw2);
    CHECK(c1.accel_cmd == c2.accel_cmd);
    CHECK(c1.steer_wheel_cmd == c2.steer_wheel_cmd);
    CHECK(raw1.accel == raw2.accel);
    CHECK(raw1.steer_wheel == raw2.steer_wheel);
  }
  SUBCASE("commands never violate the rate limit across a step disturbance") {
    ControlCommand prev;
    auto loc = pose_at(0.0, 0.0, 0.0, 5.0);
    for (int k = 0; k < 300; ++k) {
      // a 2 m lateral step appears at k = 50
      loc.y = k < 50 ? 0.0 : 2.0;
      const auto ref = straight_ref(0.0, 5.0);
      const auto cmd = control_step(loc, ref, kModeTrajectory, 1, g, p, prev, 0.01);
      CHECK(std::abs(cmd.accel_cmd - prev.accel_cmd) <= p.accel_rate * 0.01 + 1e-12);
      CHECK(std::abs(cmd.steer_wheel_cmd - prev.steer_wheel_cmd) <=
            p.steer_wheel_rate * 0.01 + 1e-12);
      CHECK(cmd.accel_cmd <= p.accel_max + 1e-12);
      CHECK(cmd.accel_cmd >= p.accel_min - 1e-12);
      CHECK(std::abs(cmd.steer_wheel_cmd) <= p.steer_wheel_max + 1e-12);
      prev = cmd;
    }
  }
  SUBCASE("direct actuation maps pedals in path mode at low speed") {
    auto ref = straight_ref(0.0, 1.5, RefMode::kPath);
    auto loc = pose_at(0.0, 0.0, 0.0, 0.5);
    const auto cmd = control_step(loc, ref, kModePath, 1, g, p, {}, 0.01);
    CHECK(cmd.direct_actuation);
    CHECK(cmd.throttle > 0.0);
    CHECK(cmd.brake == 0.0);
    CHECK(cmd.throttle == doctest::Approx(cmd.accel_cmd / 2.0));

    // braking case: reference slower than the vehicle
    ref.v = 0.0;
    loc.v = 1.0;
    ControlCommand prev;
    prev.accel_cmd = -0.5;
    const auto braking = control_step(loc, ref, kModePath, 1, g, p, prev, 0.01);
    CHECK(braking.throttle == 0.0);
    CHECK(braking.brake == doctest::Approx(-braking.accel_cmd / 4.0));
    CHECK(braking.throttle * braking.brake == 0.0);
  }
  SUBCASE("reverse direct actuation uses gear-relative pedals") {
    auto ref = straight_ref(0.0, 1.0, RefMode::kPath);
    const auto loc = pose_at(0.0, 0.0, 0.0, -0.2);  // backing up slower than wanted
    const auto cmd = control_step(loc, ref, kModePath, -1, g, p, {}, 0.01);
    CHECK(cmd.direct_actuation);
    CHECK(cmd.gear_cmd == -1);
    CHECK(cmd.accel_cmd < 0.0);   // accelerate backward
    CHECK(cmd.throttle > 0.0);    // via throttle, not brake
    CHECK(cmd.brake == 0.0);
  }
  SUBCASE("no direct actuation above the threshold speed") {
    const auto ref = straight_ref(0.0, 5.0, RefMode::kPath);
    const auto loc = pose_at(0.0, 0.0, 0.0, 4.0);
    const auto cmd = control_step(loc, ref, kModePath, 1, g, p, {}, 0.01);
    CHECK_FALSE(cmd.direct_actuation);
    CHECK(cmd.throttle == 0.0);
    CHECK(cmd.brake == 0.0);
  }
}
