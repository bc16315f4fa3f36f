#include "omni360/trajectory.hpp"

#include "omni360/error.hpp"
#include "omni360/rng.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace omni360 {

namespace {

constexpr int kCoeffs = 6;
constexpr int kGridSteps = 1000;
constexpr double kTikhonov = 1e-10;
constexpr int kRefineSteps = 3;

// k! / (k - n)!
double falling(int k, int n) {
  double r = 1.0;
  for (int j = 0; j < n; ++j) r *= static_cast<double>(k - j);
  return r;
}

// Snap Gram matrix of a quintic on the unit interval.
Eigen::Matrix2d unit_snap_gram() {
  Eigen::Matrix2d q;
  q << 576.0, 1440.0, 1440.0, 4800.0;
  return q;
}

// Golden-section maximisation of f on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60 && b - a > 1e-12 * (1.0 + hi); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    }
  }
  return std::max(f1, f2);
}

double segment_peak(const PolySegment& seg, int order) {
  auto norm_at = [&](double tau) { return seg.eval(tau, order).norm(); };
  const double h = seg.duration / kGridSteps;
  int best = 0;
  double best_val = -1.0;
  for (int j = 0; j <= kGridSteps; ++j) {
    const double val = norm_at(j * h);
    if (val > best_val) {
      best_val = val;
      best = j;
    }
  }
  const double lo = std::max(0, best - 1) * h;
  const double hi = std::min(kGridSteps, best + 1) * h;
  return std::max(best_val, golden_max(norm_at, lo, hi));
}

}  // namespace

Vec3d PolySegment::eval(double tau, int order) const {
  Vec3d out = Vec3d::Zero();
  double power = 1.0;
  for (int k = order; k < kCoeffs; ++k) {
    out += falling(k, order) * power * coeffs.col(k);
    power *= tau;
  }
  return out;
}

double PolyTrajectory::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

Vec3d PolyTrajectory::eval(double t, int order) const {
  if (segments.empty()) return Vec3d::Zero();
  t = std::max(t, 0.0);
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    if (t <= segments[i].duration) return segments[i].eval(t, order);
    t -= segments[i].duration;
  }
  const auto& last = segments.back();
  return last.eval(std::min(t, last.duration), order);
}

std::vector<double> allocate_times(const std::vector<Waypoint>& wps,
                                   const KinematicLimits& lim) {
  if (wps.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "at least two waypoints are required");
  if (!(lim.v_max > 0.0) || !(lim.a_max > 0.0))
    throw Error(ErrorCode::InvalidArgument, "kinematic limits must be positive");
  std::vector<double> times;
  times.reserve(wps.size() - 1);
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    if (!wps[i].allFinite() || !wps[i + 1].allFinite())
      throw Error(ErrorCode::InvalidArgument, "waypoints must be finite");
    const double d = (wps[i + 1] - wps[i]).norm();
    if (d == 0.0)
      throw Error(ErrorCode::InvalidArgument,
                  "waypoints " + std::to_string(i) + " and " + std::to_string(i + 1) +
                      " coincide");
    const double cruise = lim.v_max * lim.v_max / lim.a_max;
    times.push_back(d >= cruise ? d / lim.v_max + lim.v_max / lim.a_max
                                : 2.0 * std::sqrt(d / lim.a_max));
  }
  return times;
}

double segment_snap_cost(const PolySegment& seg, int axis) {
  // Snap in local time: 24 a4 + 120 a5 tau.
  const double a4 = seg.coeffs(axis, 4), a5 = seg.coeffs(axis, 5);
  const double T = seg.duration;
  return 576.0 * a4 * a4 * T + 2880.0 * a4 * a5 * T * T + 4800.0 * a5 * a5 * T * T * T;
}

PolyTrajectory solve_min_snap(const std::vector<Waypoint>& wps,
                              const std::vector<double>& times) {
  if (wps.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "at least two waypoints are required");
  if (times.size() + 1 != wps.size())
    throw Error(ErrorCode::InvalidArgument, "need one duration per segment");
  const int m = static_cast<int>(times.size());
  for (int i = 0; i < m; ++i) {
    if (!(times[i] > 0.0) || !std::isfinite(times[i]))
      throw Error(ErrorCode::InvalidArgument,
                  "segment " + std::to_string(i) + " has a non-positive duration");
  }

  // Unknowns are coefficients in normalised time s = tau / T per segment,
  // c_k = a_k T^k, which keeps the system well scaled for long segments.
  const int n = kCoeffs * m;
  const int n_con = 5 * m + 1;
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
  const Eigen::Matrix2d gram = unit_snap_gram();
  for (int i = 0; i < m; ++i)
    hess.block<2, 2>(kCoeffs * i + 4, kCoeffs * i + 4) = gram / std::pow(times[i], 7);
  const double hess_scale = hess.diagonal().maxCoeff();
  hess /= hess_scale;

  Eigen::MatrixXd con = Eigen::MatrixXd::Zero(n_con, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n_con, 3);
  int row = 0;
  for (int i = 0; i < m; ++i) {
    con(row, kCoeffs * i) = 1.0;
    rhs.row(row++) = wps[i].transpose();
    con.block(row, kCoeffs * i, 1, kCoeffs).setOnes();
    rhs.row(row++) = wps[i + 1].transpose();
  }
  for (int order = 1; order <= 2; ++order) {
    con(row++, order) = falling(order, order);
    for (int k = order; k < kCoeffs; ++k)
      con(row, kCoeffs * (m - 1) + k) = falling(k, order);
    ++row;
  }
  for (int i = 0; i + 1 < m; ++i) {
    for (int order = 1; order <= 3; ++order) {
      for (int k = order; k < kCoeffs; ++k) con(row, kCoeffs * i + k) = falling(k, order);
      con(row, kCoeffs * (i + 1) + order) =
          -falling(order, order) * std::pow(times[i] / times[i + 1], order);
      ++row;
    }
  }

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + n_con, n + n_con);
  kkt.topLeftCorner(n, n) = 2.0 * hess;
  kkt.topRightCorner(n, n_con) = con.transpose();
  kkt.bottomLeftCorner(n_con, n) = con;
  Eigen::MatrixXd full_rhs = Eigen::MatrixXd::Zero(n + n_con, 3);
  full_rhs.bottomRows(n_con) = rhs;

  // Factor the regularised system, then refine against the exact one so the
  // regulariser does not bias J.
  Eigen::MatrixXd kkt_reg = kkt;
  kkt_reg.topLeftCorner(n, n).diagonal().array() += 2.0 * kTikhonov;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt_reg);
  if (!lu.isInvertible()) {
    const auto shortest = std::min_element(times.begin(), times.end()) - times.begin();
    throw Error(ErrorCode::Degenerate,
                "singular KKT system; degenerate segment " + std::to_string(shortest));
  }
  Eigen::MatrixXd sol = lu.solve(full_rhs);
  for (int it = 0; it < kRefineSteps; ++it) sol += lu.solve(full_rhs - kkt * sol);
  if (!sol.allFinite())
    throw Error(ErrorCode::Degenerate, "KKT solution is not finite");

  PolyTrajectory traj;
  traj.segments.resize(m);
  for (int i = 0; i < m; ++i) {
    PolySegment& seg = traj.segments[i];
    seg.duration = times[i];
    for (int k = 0; k < kCoeffs; ++k)
      seg.coeffs.col(k) = sol.row(kCoeffs * i + k).transpose() / std::pow(times[i], k);
    for (int axis = 0; axis < 3; ++axis) traj.snap_cost += segment_snap_cost(seg, axis);
  }
  return traj;
}

KinematicPeaks kinematic_peaks(const PolyTrajectory& traj) {
  KinematicPeaks peaks;
  for (const auto& seg : traj.segments) {
    peaks.speed = std::max(peaks.speed, segment_peak(seg, 1));
    peaks.accel = std::max(peaks.accel, segment_peak(seg, 2));
  }
  return peaks;
}

PolyTrajectory scale_time(const PolyTrajectory& traj, double k) {
  PolyTrajectory out = traj;
  out.snap_cost = 0.0;
  for (auto& seg : out.segments) {
    seg.duration *= k;
    for (int j = 0; j < kCoeffs; ++j) seg.coeffs.col(j) /= std::pow(k, j);
    for (int axis = 0; axis < 3; ++axis) out.snap_cost += segment_snap_cost(seg, axis);
  }
  return out;
}

PolyTrajectory enforce_limits(const PolyTrajectory& traj, const KinematicLimits& lim) {
  const KinematicPeaks peaks = kinematic_peaks(traj);
  const double k = std::max({1.0, peaks.speed / lim.v_max, std::sqrt(peaks.accel / lim.a_max)});
  if (k == 1.0) return traj;
  return scale_time(traj, k);
}

std::vector<TrajectorySample> sample(const PolyTrajectory& traj, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "sampling interval must be > 0");
  const double total = traj.total_duration();
  const double tol = 1e-9 * std::max(1.0, total);
  std::vector<TrajectorySample> rows;
  for (long n = 0;; ++n) {
    double t = static_cast<double>(n) * dt;
    const bool last = t >= total - tol;
    if (last) t = total;
    rows.push_back({t, traj.eval(t, 0), traj.eval(t, 1), traj.eval(t, 2)});
    if (last) break;
  }
  return rows;
}

PolyTrajectory plan_route(const std::vector<Waypoint>& wps, const KinematicLimits& lim) {
  return enforce_limits(solve_min_snap(wps, allocate_times(wps, lim)), lim);
}

double polyline_length(const std::vector<Waypoint>& route) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < route.size(); ++i) len += (route[i + 1] - route[i]).norm();
  return len;
}

std::vector<std::vector<Waypoint>> gen_waypoint_routes(const RouteGenConfig& cfg) {
  constexpr int kMinPoints = 3;
  constexpr int kMaxPoints = 8;
  constexpr int kRouteAttempts = 1000;
  constexpr int kLegAttempts = 64;
  constexpr double kMaxElevation = 0.3;  // rad

  if (cfg.count < 1) throw Error(ErrorCode::InvalidArgument, "route count must be >= 1");
  if (!(cfg.min_length > 0.0) || !(cfg.max_length >= cfg.min_length))
    throw Error(ErrorCode::InvalidArgument, "length range must satisfy 0 < min <= max");
  if (!(cfg.min_leg > 0.0))
    throw Error(ErrorCode::InvalidArgument, "minimum leg length must be > 0");
  if (!(cfg.bounds.min.array() < cfg.bounds.max.array()).all())
    throw Error(ErrorCode::InvalidArgument, "route bounds require min < max");
  if (cfg.max_length < (kMinPoints - 1) * cfg.min_leg)
    throw Error(ErrorCode::Infeasible, "length range too short for the minimum leg");

  auto inside = [&](const Vec3d& p) {
    return (p.array() >= cfg.bounds.min.array()).all() &&
           (p.array() <= cfg.bounds.max.array()).all();
  };

  Rng rng(cfg.seed);
  std::vector<std::vector<Waypoint>> routes;
  routes.reserve(cfg.count);
  const double span = cfg.max_length - cfg.min_length;
  for (int r = 0; r < cfg.count; ++r) {
    bool placed = false;
    for (int attempt = 0; attempt < kRouteAttempts && !placed; ++attempt) {
      // Keep the target strictly inside the range so rounding in the
      // polyline sum cannot push it out.
      const double target = cfg.min_length + span * (1e-6 + (1.0 - 2e-6) * rng.uniform());
      int legs = rng.uniform_int(kMinPoints, kMaxPoints) - 1;
      while (legs > kMinPoints - 1 && target / legs < cfg.min_leg) --legs;
      if (target / legs < cfg.min_leg) continue;

      std::vector<double> weights(legs);
      double weight_sum = 0.0;
      for (auto& w : weights) weight_sum += (w = 0.5 + rng.uniform());
      const double slack = target - legs * cfg.min_leg;

      std::vector<Waypoint> route;
      route.reserve(legs + 1);
      Vec3d start;
      for (int k = 0; k < 3; ++k) start[k] = rng.uniform(cfg.bounds.min[k], cfg.bounds.max[k]);
      route.push_back(start);
      bool ok = true;
      for (int leg = 0; leg < legs && ok; ++leg) {
        const double len = cfg.min_leg + slack * weights[leg] / weight_sum;
        ok = false;
        for (int tries = 0; tries < kLegAttempts; ++tries) {
          const double az = rng.uniform(-std::numbers::pi, std::numbers::pi);
          const double el = rng.uniform(-kMaxElevation, kMaxElevation);
          const Vec3d dir(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
          const Vec3d next = route.back() + len * dir;
          if (inside(next)) {
            route.push_back(next);
            ok = true;
            break;
          }
        }
      }
      if (!ok) continue;
      const double length = polyline_length(route);
      if (length < cfg.min_length || length > cfg.max_length) continue;
      routes.push_back(std::move(route));
      placed = true;
    }
    if (!placed)
      throw Error(ErrorCode::Infeasible,
                  "could not place route " + std::to_string(r) + " inside the bounds");
  }
  return routes;
}

}  // namespace omni360
