#pragma once

// Minimum-snap trajectories: quintic segments through waypoints, solved per
// axis as an equality-constrained QP, then time-scaled into kinematic limits.

#include "omni360/sphere_geom.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace omni360 {

using Waypoint = Vec3d;

struct KinematicLimits {
  double a_max = 3.0;   ///< m/s^2
  double v_max = 16.0;  ///< m/s
  double dt = 0.5;      ///< sampling interval, s
};

/// One polynomial piece: p(tau) = sum_k coeffs(axis, k) * tau^k for local
/// time tau in [0, duration].
struct PolySegment {
  Eigen::Matrix<double, 3, 6> coeffs = Eigen::Matrix<double, 3, 6>::Zero();
  double duration = 1.0;

  /// Derivative `order` (0..5) of every axis at local time tau.
  Vec3d eval(double tau, int order = 0) const;
};

struct PolyTrajectory {
  std::vector<PolySegment> segments;
  double snap_cost = 0.0;  ///< summed over axes

  double total_duration() const;
  /// Derivative `order` at global time t (clamped to [0, total]).
  Vec3d eval(double t, int order = 0) const;
};

struct TrajectorySample {
  double t;
  Vec3d p, v, a;
};

/// Trapezoidal-profile segment durations. Throws Error(InvalidArgument) on
/// fewer than two waypoints or repeated consecutive waypoints.
std::vector<double> allocate_times(const std::vector<Waypoint>& wps,
                                   const KinematicLimits& lim);

/// Rest-to-rest minimum-snap fit with C3 continuity at interior knots.
/// Throws Error(Degenerate) if the KKT system cannot be solved.
PolyTrajectory solve_min_snap(const std::vector<Waypoint>& wps,
                              const std::vector<double>& times);

/// Snap integral of one axis of a segment.
double segment_snap_cost(const PolySegment& seg, int axis);

struct KinematicPeaks {
  double speed = 0.0;
  double accel = 0.0;
};

/// Maxima of |v| and |a| over a 1000-step grid per segment, refined locally
/// around the best grid points.
KinematicPeaks kinematic_peaks(const PolyTrajectory& traj);

/// Returns the trajectory with all durations multiplied by k.
PolyTrajectory scale_time(const PolyTrajectory& traj, double k);

/// Uniform time stretch by the smallest k >= 1 that satisfies the limits.
PolyTrajectory enforce_limits(const PolyTrajectory& traj, const KinematicLimits& lim);

/// Rows at 0, dt, 2dt, ... and always the final time.
std::vector<TrajectorySample> sample(const PolyTrajectory& traj, double dt);

/// allocate_times -> solve_min_snap -> enforce_limits.
PolyTrajectory plan_route(const std::vector<Waypoint>& wps, const KinematicLimits& lim);

struct Bounds3 {
  Vec3d min;
  Vec3d max;
};

struct RouteGenConfig {
  std::uint64_t seed = 0;
  int count = 1;
  double min_length = 50.0;
  double max_length = 150.0;
  Bounds3 bounds{Vec3d(-100, 5, -100), Vec3d(100, 60, 100)};
  double min_leg = 5.0;
};

double polyline_length(const std::vector<Waypoint>& route);

/// Seeded routes of 3..8 waypoints inside bounds, total length within
/// [min_length, max_length], every leg >= min_leg. Throws Error(Infeasible)
/// when a route cannot be placed after bounded retries.
std::vector<std::vector<Waypoint>> gen_waypoint_routes(const RouteGenConfig& cfg);

}  // namespace omni360
