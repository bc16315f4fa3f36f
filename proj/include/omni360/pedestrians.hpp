#pragma once

// Seeded pedestrian agents with a Walking / Chatting / OnPhoneCall state
// machine, proximity-triggered chats and rigid-skeleton keypoint export.

#include "omni360/raycast_scene.hpp"
#include "omni360/rng.hpp"
#include "omni360/sphere_geom.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace omni360 {

enum class Activity { Walking, Chatting, OnPhoneCall };

std::string_view activity_name(Activity a);

struct AgentState {
  Activity activity = Activity::Walking;
  int partner = -1;        ///< chat partner id while Chatting
  double remaining = 0.0;  ///< seconds left in Chatting / OnPhoneCall
};

inline constexpr int kJointCount = 17;

struct Joint {
  std::string_view name;
  Vec3d offset;  ///< body frame: +x right, +y up, +z forward, meters
};

/// Canonical joint set shared by every agent, root first.
const std::array<Joint, kJointCount>& canonical_skeleton();

struct Agent {
  int id = 0;
  Vec3d position = Vec3d::Zero();  ///< ground plane, y == 0
  double heading = 0.0;            ///< radians, 0 faces +z, pi/2 faces +x
  double speed = 0.0;
  AgentState state;
  int last_partner = -1;  ///< blocks re-chatting until the pair separates
};

/// Axis-aligned area on the ground plane (x, z).
struct Area {
  double x_min = 0.0, x_max = 30.0;
  double z_min = 0.0, z_max = 30.0;
};

struct PedestrianParams {
  double walk_speed = 1.4;             ///< m/s
  double chat_radius = 1.5;            ///< m
  double chat_duration = 5.0;          ///< s
  double phone_prob_per_tick = 0.002;  ///< per Walking agent per step
  double phone_duration = 10.0;        ///< s
};

enum class EventKind { ChatStart, ChatEnd, PhoneStart, PhoneEnd, Spawn };

std::string_view event_kind_name(EventKind k);

struct SimEvent {
  long tick = 0;
  EventKind kind = EventKind::Spawn;
  int agent = 0;
  int other = -1;  ///< chat partner, -1 otherwise

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

/// One line per event: "<tick> <kind> <agent> [<other>]".
std::string format_event(const SimEvent& e);

class PedestrianWorld {
 public:
  /// Throws Error(InvalidArgument) for bad parameters and Error(Infeasible)
  /// when the agents cannot be placed 0.5 m apart.
  PedestrianWorld(std::uint64_t seed, int n_agents, const Area& area,
                  const PedestrianParams& params = {});
  /// Explicit placement. Ids are reassigned to 0..n-1 and agents start
  /// Walking at walk_speed; positions must lie inside the area.
  PedestrianWorld(std::uint64_t seed, std::vector<Agent> agents, const Area& area,
                  const PedestrianParams& params = {});

  /// Advances one tick. Order: timers, chat triggers in ascending
  /// (min id, max id), phone rolls in ascending id, then motion.
  std::vector<SimEvent> step(double dt);

  const std::vector<Agent>& agents() const { return agents_; }
  const Area& area() const { return area_; }
  const PedestrianParams& params() const { return params_; }
  long tick() const { return tick_; }
  double time() const { return time_; }
  /// Spawn events emitted at construction (tick 0).
  const std::vector<SimEvent>& spawn_events() const { return spawn_events_; }

 private:
  void move(Agent& a, double dt) const;

  Area area_;
  PedestrianParams params_;
  Rng rng_;
  std::vector<Agent> agents_;
  std::vector<SimEvent> spawn_events_;
  long tick_ = 0;
  double time_ = 0.0;
};

/// World-frame joints of one agent, in canonical order.
std::array<Vec3d, kJointCount> agent_keypoints(const Agent& agent);

std::vector<std::array<Vec3d, kJointCount>> export_keypoints(const PedestrianWorld& world);

struct ProjectedJoint {
  ErpCoord<double> erp;
  double pixel_x = 0.0;  ///< u * W_e
  double pixel_y = 0.0;  ///< v * H_e
  double depth = 0.0;    ///< camera-to-joint distance, m
  bool visible = true;
};

/// `scene` supplies occluders; pass nullptr for an empty world.
std::vector<std::array<ProjectedJoint, kJointCount>> project_keypoints(
    const PedestrianWorld& world, const CameraPose& cam, int erp_height,
    const Scene* scene = nullptr);

struct MpdeTruth {
  double distance = 0.0;   ///< m
  double angle_deg = 0.0;  ///< from camera forward axis
};

std::vector<MpdeTruth> mpde_ground_truth(const PedestrianWorld& world, const CameraPose& cam);

}  // namespace omni360
