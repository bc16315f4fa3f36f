#include "omni360/pedestrians.hpp"

#include "omni360/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace omni360 {

namespace {

constexpr double kMinSeparation = 0.5;
constexpr int kSpawnAttempts = 10000;
constexpr double kTimerEpsilon = 1e-9;

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

double ground_distance(const Agent& a, const Agent& b) {
  return std::hypot(a.position.x() - b.position.x(), a.position.z() - b.position.z());
}

Mat3d yaw_rotation(double heading) {
  const double c = std::cos(heading), s = std::sin(heading);
  Mat3d r;
  r << c, 0, s,  //
      0, 1, 0,   //
      -s, 0, c;
  return r;
}

}  // namespace

std::string_view activity_name(Activity a) {
  switch (a) {
    case Activity::Walking: return "Walking";
    case Activity::Chatting: return "Chatting";
    case Activity::OnPhoneCall: return "OnPhoneCall";
  }
  return "?";
}

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::ChatStart: return "ChatStart";
    case EventKind::ChatEnd: return "ChatEnd";
    case EventKind::PhoneStart: return "PhoneStart";
    case EventKind::PhoneEnd: return "PhoneEnd";
    case EventKind::Spawn: return "Spawn";
  }
  return "?";
}

std::string format_event(const SimEvent& e) {
  std::string line = std::to_string(e.tick) + " " + std::string(event_kind_name(e.kind)) +
                     " " + std::to_string(e.agent);
  if (e.other >= 0) line += " " + std::to_string(e.other);
  return line;
}

const std::array<Joint, kJointCount>& canonical_skeleton() {
  static const std::array<Joint, kJointCount> joints = {{
      {"pelvis", Vec3d(0.00, 0.95, 0.00)},
      {"spine", Vec3d(0.00, 1.20, 0.00)},
      {"neck", Vec3d(0.00, 1.50, 0.00)},
      {"head", Vec3d(0.00, 1.65, 0.00)},
      {"left_shoulder", Vec3d(-0.20, 1.45, 0.00)},
      {"left_elbow", Vec3d(-0.25, 1.15, 0.00)},
      {"left_wrist", Vec3d(-0.27, 0.88, 0.03)},
      {"right_shoulder", Vec3d(0.20, 1.45, 0.00)},
      {"right_elbow", Vec3d(0.25, 1.15, 0.00)},
      {"right_wrist", Vec3d(0.27, 0.88, 0.03)},
      {"left_hip", Vec3d(-0.10, 0.92, 0.00)},
      {"left_knee", Vec3d(-0.10, 0.50, 0.02)},
      {"left_ankle", Vec3d(-0.10, 0.08, 0.00)},
      {"right_hip", Vec3d(0.10, 0.92, 0.00)},
      {"right_knee", Vec3d(0.10, 0.50, 0.02)},
      {"right_ankle", Vec3d(0.10, 0.08, 0.00)},
      {"nose", Vec3d(0.00, 1.62, 0.10)},
  }};
  return joints;
}

namespace {

void check_setup(int n_agents, const Area& area, const PedestrianParams& params) {
  if (n_agents < 1) throw Error(ErrorCode::InvalidArgument, "need at least one agent");
  if (!(area.x_max > area.x_min) || !(area.z_max > area.z_min))
    throw Error(ErrorCode::InvalidArgument, "active area must have positive extent");
  if (!(params.walk_speed > 0.0) || !(params.chat_radius >= 0.0) ||
      !(params.chat_duration > 0.0) || !(params.phone_duration > 0.0) ||
      !(params.phone_prob_per_tick >= 0.0 && params.phone_prob_per_tick <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "invalid pedestrian parameters");
}

}  // namespace

PedestrianWorld::PedestrianWorld(std::uint64_t seed, std::vector<Agent> agents,
                                 const Area& area, const PedestrianParams& params)
    : area_(area), params_(params), rng_(seed), agents_(std::move(agents)) {
  check_setup(static_cast<int>(agents_.size()), area, params);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Agent& a = agents_[i];
    const double x = a.position.x(), z = a.position.z();
    if (!(x >= area.x_min && x <= area.x_max && z >= area.z_min && z <= area.z_max))
      throw Error(ErrorCode::InvalidArgument,
                  "agent " + std::to_string(i) + " lies outside the active area");
    a.id = static_cast<int>(i);
    a.position.y() = 0.0;
    a.speed = params.walk_speed;
    a.state = AgentState{};
    a.last_partner = -1;
    spawn_events_.push_back({0, EventKind::Spawn, a.id, -1});
  }
}

PedestrianWorld::PedestrianWorld(std::uint64_t seed, int n_agents, const Area& area,
                                 const PedestrianParams& params)
    : area_(area), params_(params), rng_(seed) {
  check_setup(n_agents, area, params);

  agents_.reserve(n_agents);
  for (int id = 0; id < n_agents; ++id) {
    bool placed = false;
    for (int attempt = 0; attempt < kSpawnAttempts && !placed; ++attempt) {
      Agent a;
      a.id = id;
      a.position = Vec3d(rng_.uniform(area.x_min, area.x_max), 0.0,
                         rng_.uniform(area.z_min, area.z_max));
      const bool clear = std::none_of(agents_.begin(), agents_.end(), [&](const Agent& o) {
        return ground_distance(a, o) < kMinSeparation;
      });
      if (!clear) continue;
      a.heading = rng_.uniform(-std::numbers::pi, std::numbers::pi);
      a.speed = params.walk_speed;
      agents_.push_back(a);
      spawn_events_.push_back({0, EventKind::Spawn, id, -1});
      placed = true;
    }
    if (!placed)
      throw Error(ErrorCode::Infeasible, "active area too small to spawn agent " +
                                             std::to_string(id) + " with 0.5 m separation");
  }
}

void PedestrianWorld::move(Agent& a, double dt) const {
  double dx = std::sin(a.heading), dz = std::cos(a.heading);
  double x = a.position.x() + a.speed * dt * dx;
  double z = a.position.z() + a.speed * dt * dz;
  // Mirror about the walls until inside; path length is preserved.
  for (int guard = 0; guard < 64; ++guard) {
    bool changed = false;
    if (x > area_.x_max) { x = 2.0 * area_.x_max - x; dx = -dx; changed = true; }
    if (x < area_.x_min) { x = 2.0 * area_.x_min - x; dx = -dx; changed = true; }
    if (z > area_.z_max) { z = 2.0 * area_.z_max - z; dz = -dz; changed = true; }
    if (z < area_.z_min) { z = 2.0 * area_.z_min - z; dz = -dz; changed = true; }
    if (!changed) break;
  }
  a.position = Vec3d(std::clamp(x, area_.x_min, area_.x_max), 0.0,
                     std::clamp(z, area_.z_min, area_.z_max));
  a.heading = std::atan2(dx, dz);
}

std::vector<SimEvent> PedestrianWorld::step(double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be > 0");
  ++tick_;
  time_ += dt;
  std::vector<SimEvent> events;
  const int n = static_cast<int>(agents_.size());

  // Timers. A chatting pair is handled once, from its lower id.
  for (Agent& a : agents_) {
    if (a.state.activity == Activity::Walking) continue;
    if (a.state.activity == Activity::Chatting) {
      if (a.state.partner < a.id) continue;
      Agent& b = agents_[a.state.partner];
      a.state.remaining -= dt;
      b.state.remaining -= dt;
      if (a.state.remaining > kTimerEpsilon) continue;
      events.push_back({tick_, EventKind::ChatEnd, a.id, b.id});
      for (Agent* p : {&a, &b}) {
        p->last_partner = p->state.partner;
        p->state = AgentState{};
        p->speed = params_.walk_speed;
        p->heading = wrap_angle(p->heading + std::numbers::pi);
      }
    } else {
      a.state.remaining -= dt;
      if (a.state.remaining > kTimerEpsilon) continue;
      events.push_back({tick_, EventKind::PhoneEnd, a.id, -1});
      a.state = AgentState{};
      a.speed = params_.walk_speed;
    }
  }

  for (Agent& a : agents_) {
    if (a.last_partner >= 0 &&
        ground_distance(a, agents_[a.last_partner]) >= params_.chat_radius)
      a.last_partner = -1;
  }

  // Proximity messages, ascending (min id, max id).
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Agent& a = agents_[i];
      Agent& b = agents_[j];
      if (a.state.activity != Activity::Walking || b.state.activity != Activity::Walking)
        continue;
      if (a.last_partner == j) continue;
      if (!(ground_distance(a, b) < params_.chat_radius)) continue;
      const double dx = b.position.x() - a.position.x();
      const double dz = b.position.z() - a.position.z();
      const double facing = (dx == 0.0 && dz == 0.0) ? a.heading : std::atan2(dx, dz);
      a.heading = wrap_angle(facing);
      b.heading = wrap_angle(facing + std::numbers::pi);
      a.state = AgentState{Activity::Chatting, j, params_.chat_duration};
      b.state = AgentState{Activity::Chatting, i, params_.chat_duration};
      a.speed = b.speed = 0.0;
      events.push_back({tick_, EventKind::ChatStart, i, j});
    }
  }

  for (Agent& a : agents_) {
    if (a.state.activity != Activity::Walking) continue;
    if (rng_.uniform() < params_.phone_prob_per_tick) {
      a.state = AgentState{Activity::OnPhoneCall, -1, params_.phone_duration};
      a.speed = 0.5 * params_.walk_speed;
      events.push_back({tick_, EventKind::PhoneStart, a.id, -1});
    }
  }

  for (Agent& a : agents_) {
    if (a.speed > 0.0) move(a, dt);
  }

  std::sort(events.begin(), events.end(), [](const SimEvent& x, const SimEvent& y) {
    return std::tie(x.tick, x.agent, x.kind) < std::tie(y.tick, y.agent, y.kind);
  });
  return events;
}

std::array<Vec3d, kJointCount> agent_keypoints(const Agent& agent) {
  const Mat3d rot = yaw_rotation(agent.heading);
  const auto& skeleton = canonical_skeleton();
  std::array<Vec3d, kJointCount> out;
  for (int k = 0; k < kJointCount; ++k) out[k] = agent.position + rot * skeleton[k].offset;
  return out;
}

std::vector<std::array<Vec3d, kJointCount>> export_keypoints(const PedestrianWorld& world) {
  std::vector<std::array<Vec3d, kJointCount>> out;
  out.reserve(world.agents().size());
  for (const Agent& a : world.agents()) out.push_back(agent_keypoints(a));
  return out;
}

std::vector<std::array<ProjectedJoint, kJointCount>> project_keypoints(
    const PedestrianWorld& world, const CameraPose& cam, int erp_height, const Scene* scene) {
  if (erp_height < 2) throw Error(ErrorCode::InvalidArgument, "ERP height must be >= 2");
  const Mat3d world_to_cam = cam.rotation().transpose();
  const double width = 2.0 * erp_height;
  std::vector<std::array<ProjectedJoint, kJointCount>> out;
  out.reserve(world.agents().size());
  for (const auto& joints : export_keypoints(world)) {
    std::array<ProjectedJoint, kJointCount> row;
    for (int k = 0; k < kJointCount; ++k) {
      const Vec3d ray = joints[k] - cam.position;
      const double dist = ray.norm();
      if (!(dist > 0.0))
        throw Error(ErrorCode::InvalidArgument, "camera coincides with a joint");
      const Vec3d dir = ray / dist;
      ProjectedJoint& pj = row[k];
      pj.erp = dir_to_erp<double>(world_to_cam * dir);
      pj.pixel_x = pj.erp.u * width;
      pj.pixel_y = pj.erp.v * erp_height;
      pj.depth = dist;
      pj.visible = scene == nullptr || !scene->intersect(cam.position, dir, dist - 1e-6);
    }
    out.push_back(row);
  }
  return out;
}

std::vector<MpdeTruth> mpde_ground_truth(const PedestrianWorld& world, const CameraPose& cam) {
  const Vec3d forward = cam.forward();
  std::vector<MpdeTruth> out;
  out.reserve(world.agents().size());
  for (const Agent& a : world.agents()) {
    const Vec3d root = agent_keypoints(a)[0];
    const Vec3d ray = root - cam.position;
    MpdeTruth gt;
    gt.distance = ray.norm();
    const double c = std::clamp(forward.dot(ray) / gt.distance, -1.0, 1.0);
    // atan2 form keeps precision near 0 and 180 degrees.
    gt.angle_deg = std::atan2(forward.cross(ray).norm() / gt.distance, c) * 180.0 / std::numbers::pi;
    out.push_back(gt);
  }
  return out;
}

}  // namespace omni360
