#include "omni360/trajectory.hpp"

#include "omni360/error.hpp"
#include "omni360/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace omni360;

namespace {

std::vector<Waypoint> random_route(Rng& rng, int points) {
  std::vector<Waypoint> wps;
  for (int i = 0; i < points; ++i)
    wps.emplace_back(rng.uniform(-20, 20), rng.uniform(0, 10), rng.uniform(-20, 20));
  return wps;
}

void check_knots(const PolyTrajectory& traj, const std::vector<Waypoint>& wps) {
  const auto& segs = traj.segments;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK((segs[i].eval(0.0) - wps[i]).norm() < 1e-6);
    CHECK((segs[i].eval(segs[i].duration) - wps[i + 1]).norm() < 1e-6);
  }
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    for (int order = 0; order <= 3; ++order) {
      const double gap = (segs[i].eval(segs[i].duration, order) - segs[i + 1].eval(0.0, order)).norm();
      CHECK(gap < 1e-6);
    }
  }
}

}  // namespace

TEST_CASE("allocate_times trapezoid and triangle regimes") {
  auto t = allocate_times({Vec3d(0, 0, 0), Vec3d(10, 0, 0)}, {5.0, 5.0, 0.1});
  CHECK(t[0] == doctest::Approx(3.0).epsilon(1e-15));
  t = allocate_times({Vec3d(0, 0, 0), Vec3d(0, 1, 0)}, {3.0, 16.0, 0.5});
  CHECK(t[0] == doctest::Approx(2.0 * std::sqrt(1.0 / 3.0)).epsilon(1e-15));
  CHECK(t[0] == doctest::Approx(1.1547).epsilon(1e-4));
  t = allocate_times({Vec3d(0, 0, 0), Vec3d(3, 4, 0), Vec3d(3, 4, 5)}, {3.0, 16.0, 0.5});
  CHECK(t[0] == t[1]);

  CHECK_THROWS_AS(allocate_times({Vec3d(1, 2, 3)}, {}), Error);
  CHECK_THROWS_AS(allocate_times({Vec3d(1, 2, 3), Vec3d(1, 2, 3)}, {}), Error);
}

TEST_CASE("single segment is the rest-to-rest quintic") {
  const auto traj = solve_min_snap({Vec3d(0, 0, 0), Vec3d(1, 0, 0)}, {1.0});
  REQUIRE(traj.segments.size() == 1);
  const auto oracle_coeffs = oracle::unit_quintic();
  const Eigen::Matrix<double, 6, 1> expected = (Eigen::Matrix<double, 6, 1>() << 0, 0, 0, 10, -15, 6).finished();
  CHECK((oracle_coeffs - expected).cwiseAbs().maxCoeff() < 1e-12);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(traj.segments[0].coeffs(0, k) - expected(k)) < 1e-9);
  CHECK(traj.eval(0.5).x() == doctest::Approx(0.5).epsilon(1e-12));

  // Quadrature of the analytic snap 360 (2s - 1), squared.
  const double j_oracle = oracle::simpson([](double s) { return std::pow(360.0 * (2 * s - 1), 2); }, 0, 1);
  CHECK(j_oracle == doctest::Approx(43200.0).epsilon(1e-12));
  CHECK(std::abs(traj.snap_cost - 43200.0) / 43200.0 < 1e-6);
  CHECK(std::abs(segment_snap_cost(traj.segments[0], 0) - j_oracle) / j_oracle < 1e-9);
}

TEST_CASE("collinear waypoints leave the other axes at zero") {
  const std::vector<Waypoint> wps{Vec3d(0, 0, 0), Vec3d(3, 0, 0), Vec3d(4, 0, 0), Vec3d(9, 0, 0)};
  const auto traj = solve_min_snap(wps, {1.0, 0.7, 2.0});
  for (const auto& seg : traj.segments) {
    CHECK(seg.coeffs.row(1).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(seg.coeffs.row(2).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("interpolation and C3 continuity on random routes") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto wps = random_route(rng, rng.uniform_int(2, 8));
    const auto traj = solve_min_snap(wps, allocate_times(wps, {3.0, 16.0, 0.5}));
    check_knots(traj, wps);
    CHECK(traj.eval(0.0, 1).norm() < 1e-9);
    CHECK(traj.eval(0.0, 2).norm() < 1e-9);
    CHECK(traj.eval(traj.total_duration(), 1).norm() < 1e-6);
    CHECK(traj.eval(traj.total_duration(), 2).norm() < 1e-6);
  }
}

TEST_CASE("KKT snap cost matches the null-space oracle") {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const int points = rng.uniform_int(2, 5);
    const auto wps = random_route(rng, points);
    std::vector<double> times;
    for (int i = 0; i + 1 < points; ++i) times.push_back(rng.uniform(0.5, 6.0));
    const double ours = solve_min_snap(wps, times).snap_cost;
    const double ref = oracle::null_space_snap_cost(wps, times);
    CHECK(std::abs(ours - ref) / ref < 1e-6);
  }
}

TEST_CASE("axis permutation permutes the solution") {
  Rng rng(21);
  const auto wps = random_route(rng, 5);
  std::vector<Waypoint> perm;
  for (const auto& w : wps) perm.emplace_back(w.z(), w.x(), w.y());
  const std::vector<double> times{1.0, 2.0, 1.5, 0.8};
  const auto a = solve_min_snap(wps, times);
  const auto b = solve_min_snap(perm, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK((a.segments[i].coeffs.row(2) - b.segments[i].coeffs.row(0)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((a.segments[i].coeffs.row(0) - b.segments[i].coeffs.row(1)).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK(a.snap_cost == doctest::Approx(b.snap_cost).epsilon(1e-12));
}

TEST_CASE("solve_min_snap argument errors") {
  CHECK_THROWS_AS(solve_min_snap({Vec3d(0, 0, 0), Vec3d(1, 0, 0)}, {}), Error);
  CHECK_THROWS_AS(solve_min_snap({Vec3d(0, 0, 0), Vec3d(1, 0, 0)}, {0.0}), Error);
  CHECK_THROWS_AS(solve_min_snap({Vec3d(0, 0, 0), Vec3d(1, 0, 0)}, {-2.0}), Error);
}

TEST_CASE("enforce_limits") {
  const auto unit = solve_min_snap({Vec3d(0, 0, 0), Vec3d(1, 0, 0)}, {1.0});
  const auto peaks = kinematic_peaks(unit);
  CHECK(peaks.speed == doctest::Approx(1.875).epsilon(1e-12));
  CHECK(peaks.accel == doctest::Approx(10.0 / std::sqrt(3.0)).epsilon(1e-9));

  // Within limits: unchanged.
  const auto same = enforce_limits(unit, {100.0, 100.0, 0.1});
  CHECK(same.segments[0].duration == 1.0);
  CHECK(same.segments[0].coeffs == unit.segments[0].coeffs);

  // Velocity-bound case: speed is twice the limit, accel well inside -> k = 2.
  const auto slowed = enforce_limits(unit, {4.0 * peaks.accel, peaks.speed / 2.0, 0.1});
  CHECK(slowed.segments[0].duration == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((slowed.eval(1.0) - unit.eval(0.5)).norm() < 1e-12);

  // Both default kinematic sets on random routes.
  Rng rng(12);
  for (const KinematicLimits lim : {KinematicLimits{3, 16, 0.5}, KinematicLimits{5, 21, 1}}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto wps = random_route(rng, rng.uniform_int(3, 6));
      const auto traj = plan_route(wps, lim);
      const auto p = kinematic_peaks(traj);
      CHECK(p.speed <= lim.v_max * (1 + 1e-6));
      CHECK(p.accel <= lim.a_max * (1 + 1e-6));
      for (const auto& s : sample(traj, lim.dt / 10)) CHECK(s.v.norm() <= lim.v_max * (1 + 1e-6));
      check_knots(traj, wps);
    }
  }
}

TEST_CASE("sample grid and finite differences") {
  const auto unit = solve_min_snap({Vec3d(0, 0, 0), Vec3d(1, 0, 0)}, {1.0});
  const auto rows = sample(unit, 0.5);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].t == 0.0);
  CHECK(rows[1].t == 0.5);
  CHECK(rows[2].t == 1.0);
  CHECK(rows[0].v.norm() == 0.0);
  CHECK(rows[0].a.norm() == 0.0);

  // Non-divisible horizon still ends exactly at the final time.
  const auto odd = sample(unit, 0.3);
  CHECK(odd.size() == 5);
  CHECK(odd.back().t == 1.0);
  CHECK_THROWS_AS(sample(unit, 0.0), Error);

  Rng rng(4);
  const auto wps = random_route(rng, 5);
  const auto traj = plan_route(wps, {3.0, 16.0, 0.5});
  const double dt = 0.01;
  const auto s = sample(traj, dt);
  const double amax = kinematic_peaks(traj).accel;
  for (std::size_t i = 1; i + 2 < s.size(); ++i) {
    const Vec3d fd = (s[i + 1].p - s[i - 1].p) / (2 * dt);
    CHECK((fd - s[i].v).norm() <= 10 * dt * dt * amax);
  }
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].t >= s[i - 1].t);
}

TEST_CASE("waypoint generator") {
  RouteGenConfig cfg;
  cfg.seed = 42;
  cfg.count = 300;
  cfg.min_length = 20;
  cfg.max_length = 50;
  const auto routes = gen_waypoint_routes(cfg);
  CHECK(routes.size() == 300);
  for (const auto& r : routes) {
    CHECK(r.size() >= 3);
    CHECK(r.size() <= 8);
    const double len = polyline_length(r);
    CHECK(len >= 20.0);
    CHECK(len <= 50.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK((r[i].array() >= cfg.bounds.min.array()).all());
      CHECK((r[i].array() <= cfg.bounds.max.array()).all());
      if (i) CHECK((r[i] - r[i - 1]).norm() >= cfg.min_leg - 1e-9);
    }
  }
  const auto again = gen_waypoint_routes(cfg);
  CHECK(again == routes);
  cfg.seed = 43;
  CHECK(gen_waypoint_routes(cfg) != routes);

  RouteGenConfig tiny = cfg;
  tiny.bounds = {Vec3d(0, 0, 0), Vec3d(1, 1, 1)};
  CHECK_THROWS_AS(gen_waypoint_routes(tiny), Error);
  RouteGenConfig short_range = cfg;
  short_range.max_length = 8;
  short_range.min_length = 1;
  CHECK_THROWS_AS(gen_waypoint_routes(short_range), Error);
}
