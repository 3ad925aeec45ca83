#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ftna/reference.hpp"

using namespace ftna;

namespace {

TrajectoryMsg line_x(double x0, double x1, int n, double v = 1.0) {
  TrajectoryMsg msg;
  msg.seq = 1;
  for (int i = 0; i < n; ++i) {
    TrajectoryPoint p;
    const double frac = static_cast<double>(i) / (n - 1);
    p.x = x0 + frac * (x1 - x0);
    p.s = p.x - x0;
    p.v = v;
    p.relative_time = frac * 10.0;
    msg.points.push_back(p);
  }
  return msg;
}

// Brute-force projection oracle: walk the polyline in tiny arc length steps
// and keep the nearest sample.
struct OracleHit {
  double dist = 0.0;
  double x = 0.0, y = 0.0;
};

OracleHit project_oracle(const TrajectoryMsg& traj, double px, double py,
                         double step = 0.001) {
  OracleHit best;
  best.dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < traj.points.size(); ++i) {
    const auto& a = traj.points[i];
    const auto& b = traj.points[i + 1];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 0; k <= n; ++k) {
      const double u = static_cast<double>(k) / n;
      const double x = a.x + u * (b.x - a.x);
      const double y = a.y + u * (b.y - a.y);
      const double dist = std::hypot(px - x, py - y);
      if (dist < best.dist) {
        best = OracleHit{dist, x, y};
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("store accepts only valid, newer trajectories") {
  const WatchdogConfig cfg;
  TrajectoryStore store;
  CHECK(store.empty());

  auto msg = line_x(0.0, 10.0, 11);
  msg.seq = 5;
  CHECK(store.update(msg, 0.0, cfg));
  CHECK_FALSE(store.empty());
  CHECK(store.current().seq == 5);
  CHECK(store.received_at() == 0.0);

  SUBCASE("older or equal seq is rejected") {
    auto old = line_x(0.0, 5.0, 6);
    old.seq = 5;
    CHECK_FALSE(store.update(old, 0.1, cfg));
    old.seq = 4;
    CHECK_FALSE(store.update(old, 0.1, cfg));
    CHECK(store.current().seq == 5);
  }
  SUBCASE("newer seq replaces") {
    auto next = line_x(0.0, 5.0, 6);
    next.seq = 6;
    CHECK(store.update(next, 0.1, cfg));
    CHECK(store.current().seq == 6);
    CHECK(store.received_at() == 0.1);
  }
  SUBCASE("invalid message leaves the store unchanged") {
    auto bad = line_x(0.0, 5.0, 6);
    bad.seq = 7;
    bad.points[2].x = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(store.update(bad, 0.1, cfg));
    CHECK(store.current().seq == 5);
  }
  SUBCASE("clear empties the store and any seq is accepted again") {
    store.clear();
    CHECK(store.empty());
    auto low = line_x(0.0, 5.0, 6);
    low.seq = 1;
    CHECK(store.update(low, 0.2, cfg));
    CHECK(store.current().seq == 1);
  }
}

TEST_CASE("ref_by_time interpolates linearly between samples") {
  TrajectoryMsg msg;
  TrajectoryPoint p0;
  p0.x = 0.0;
  p0.y = 2.0;
  p0.v = 1.0;
  p0.a = -1.0;
  p0.kappa = 0.1;
  p0.relative_time = 0.0;
  TrajectoryPoint p1 = p0;
  p1.x = 1.0;
  p1.y = 4.0;
  p1.v = 3.0;
  p1.a = 1.0;
  p1.kappa = 0.3;
  p1.s = 2.0;
  p1.relative_time = 1.0;
  msg.points = {p0, p1};

  const auto mid = ref_by_time(msg, 0.5);
  REQUIRE(mid.has_value());
  CHECK(mid->x == doctest::Approx(0.5));
  CHECK(mid->y == doctest::Approx(3.0));
  CHECK(mid->v == doctest::Approx(2.0));
  CHECK(mid->a == doctest::Approx(0.0));
  CHECK(mid->kappa == doctest::Approx(0.2));
  CHECK(mid->s == doctest::Approx(1.0));
  CHECK(mid->source_mode == RefMode::kTrajectory);

  SUBCASE("sample hits are returned verbatim") {
    const auto exact = ref_by_time(msg, 1.0);
    REQUIRE(exact.has_value());
    CHECK(exact->x == p1.x);
    CHECK(exact->v == p1.v);
    const auto first = ref_by_time(msg, 0.0);
    REQUIRE(first.has_value());
    CHECK(first->x == p0.x);
  }
  SUBCASE("out of horizon on both sides") {
    CHECK_FALSE(ref_by_time(msg, -0.1).has_value());
    CHECK_FALSE(ref_by_time(msg, 1.1).has_value());
  }
  SUBCASE("timestamp offsets the query") {
    msg.timestamp = 100.0;
    CHECK_FALSE(ref_by_time(msg, 0.5).has_value());
    const auto r = ref_by_time(msg, 100.5);
    REQUIRE(r.has_value());
    CHECK(r->x == doctest::Approx(0.5));
  }
}

TEST_CASE("ref_by_time takes the shortest angular arc") {
  TrajectoryMsg msg;
  TrajectoryPoint p0;
  p0.theta = 3.0;
  p0.relative_time = 0.0;
  TrajectoryPoint p1;
  p1.theta = -3.0;
  p1.relative_time = 1.0;
  msg.points = {p0, p1};

  const auto mid = ref_by_time(msg, 0.5);
  REQUIRE(mid.has_value());
  // midway across the pi boundary, not through zero
  CHECK(mid->theta == doctest::Approx(kPi));
  CHECK(std::abs(mid->theta) > 3.0);
}

TEST_CASE("ref_by_time is continuous and monotone in query time") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> jitter(0.01, 0.8);
  TrajectoryMsg msg;
  double t = 0.0;
  double s = 0.0;
  for (int i = 0; i < 30; ++i) {
    TrajectoryPoint p;
    p.x = s;
    p.y = std::sin(0.3 * s);
    p.theta = wrap_angle(jitter(rng) * 4.0 - 2.0);
    p.s = s;
    p.v = 1.0 + jitter(rng);
    p.relative_time = t;
    msg.points.push_back(p);
    t += jitter(rng);
    s += jitter(rng);
  }

  double prev_s = -1.0;
  const double t0 = msg.points.front().relative_time;
  const double t1 = msg.points.back().relative_time;
  for (int k = 0; k <= 500; ++k) {
    const double q = t0 + (t1 - t0) * k / 500.0;
    const auto r = ref_by_time(msg, q);
    REQUIRE(r.has_value());
    CHECK(r->s >= prev_s);
    prev_s = r->s;

    const auto r_eps = ref_by_time(msg, std::min(q + 1e-9, t1));
    REQUIRE(r_eps.has_value());
    CHECK(std::abs(r_eps->x - r->x) < 1e-6);
    CHECK(std::abs(r_eps->y - r->y) < 1e-6);
  }
}

TEST_CASE("ref_by_projection drops a perpendicular onto the nearest segment") {
  const auto msg = line_x(0.0, 10.0, 11);
  const auto r = ref_by_projection(msg, 3.2, 1.0);
  CHECK(r.x == doctest::Approx(3.2));
  CHECK(r.y == doctest::Approx(0.0));
  CHECK(r.s == doctest::Approx(3.2));
  CHECK(r.source_mode == RefMode::kPath);

  SUBCASE("pose exactly on a vertex") {
    const auto v = ref_by_projection(msg, 4.0, 0.0);
    CHECK(v.x == doctest::Approx(4.0));
    CHECK(v.y == doctest::Approx(0.0));
  }
  SUBCASE("beyond the ends clamps to the end points") {
    CHECK(ref_by_projection(msg, -5.0, 0.5).x == doctest::Approx(0.0));
    CHECK(ref_by_projection(msg, 15.0, 0.5).x == doctest::Approx(10.0));
  }
}

TEST_CASE("equidistant branches resolve to the lower segment index") {
  // A U-shaped path: 60 m out along y=0, back along y=4 (long enough that
  // the hysteresis window cannot cover both branches). A pose on the center
  // line is equidistant to both.
  TrajectoryMsg msg;
  const double xs[] = {0.0, 30.0, 60.0, 60.0, 30.0, 0.0};
  const double ys[] = {0.0, 0.0, 0.0, 4.0, 4.0, 4.0};
  double t = 0.0;
  double s = 0.0;
  for (int i = 0; i < 6; ++i) {
    TrajectoryPoint p;
    p.x = xs[i];
    p.y = ys[i];
    if (i > 0) {
      s += std::hypot(xs[i] - xs[i - 1], ys[i] - ys[i - 1]);
    }
    p.s = s;
    p.relative_time = t;
    t += 1.0;
    msg.points.push_back(p);
  }

  const auto r = ref_by_projection(msg, 2.5, 2.0);
  CHECK(r.y == doctest::Approx(0.0));  // outbound branch, lower index
  CHECK(r.s == doctest::Approx(2.5));

  SUBCASE("hysteresis keeps the match on the current branch") {
    // previous match on the return branch above (2.5, 4): stay there
    const double s_return = 60.0 + 4.0 + 57.5;
    const auto held = ref_by_projection(msg, 2.5, 2.0, s_return);
    CHECK(held.y == doctest::Approx(4.0));
    CHECK(held.s == doctest::Approx(s_return));
  }
  SUBCASE("a window that misses the polyline falls back to a full search") {
    const auto r2 = ref_by_projection(msg, 2.5, 2.0, 1e6);
    CHECK(r2.y == doctest::Approx(0.0));
  }
}

TEST_CASE("projection handles zero-length segments") {
  TrajectoryMsg msg;
  const double xs[] = {0.0, 1.0, 1.0, 1.0, 2.0};
  double t = 0.0;
  for (double x : xs) {
    TrajectoryPoint p;
    p.x = x;
    p.s = x;
    p.relative_time = t;
    t += 1.0;
    msg.points.push_back(p);
  }
  const auto r = ref_by_projection(msg, 1.0, 0.7);
  CHECK(r.x == doctest::Approx(1.0));
  CHECK(r.y == doctest::Approx(0.0));
}

TEST_CASE("projection matches the brute-force oracle on random polylines") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> turn(-0.6, 0.6);
  std::uniform_real_distribution<double> step(0.4, 2.5);
  std::uniform_real_distribution<double> lateral(0.7, 3.0);
  std::uniform_real_distribution<double> along(0.0, 1.0);

  for (int trial = 0; trial < 25; ++trial) {
    TrajectoryMsg msg;
    double x = 0.0, y = 0.0, heading = turn(rng);
    double s = 0.0, t = 0.0;
    for (int i = 0; i < 25; ++i) {
      TrajectoryPoint p;
      p.x = x;
      p.y = y;
      p.s = s;
      p.relative_time = t;
      msg.points.push_back(p);
      const double len = step(rng);
      heading += turn(rng);
      x += len * std::cos(heading);
      y += len * std::sin(heading);
      s += len;
      t += 1.0;
    }

    for (int q = 0; q < 8; ++q) {
      // query pose offset laterally from a random segment
      const std::size_t i = rng() % (msg.points.size() - 1);
      const auto& a = msg.points[i];
      const auto& b = msg.points[i + 1];
      const double u = along(rng);
      const double seg = std::hypot(b.x - a.x, b.y - a.y);
      const double nx = -(b.y - a.y) / seg;
      const double ny = (b.x - a.x) / seg;
      const double off = lateral(rng);
      const double px = a.x + u * (b.x - a.x) + off * nx;
      const double py = a.y + u * (b.y - a.y) + off * ny;

      const auto got = ref_by_projection(msg, px, py);
      const auto oracle = project_oracle(msg, px, py);
      const double got_dist = std::hypot(px - got.x, py - got.y);
      CHECK(got_dist <= oracle.dist + 1e-9);
      CHECK(std::abs(got_dist - oracle.dist) < 1e-6);
    }
  }
}
