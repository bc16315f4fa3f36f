#pragma once

// Analytic CPU scene: planes, spheres and axis-aligned boxes ray-cast into
// cube-face rasters or directly into an equirectangular frame.

#include "omni360/raster.hpp"
#include "omni360/sphere_geom.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace omni360 {

inline constexpr double kSkyDepth = std::numeric_limits<double>::infinity();
inline constexpr std::uint8_t kSkySemantic = 255;
inline constexpr std::uint32_t kBackgroundEntity = 0;
inline constexpr std::uint32_t kMaxEntityId = (1u << 24) - 1;
inline constexpr Rgb kSkyColor = {135, 206, 235};

struct Plane {
  Vec3d normal;  ///< points of the plane satisfy normal . x == offset
  double offset = 0.0;
};

struct Sphere {
  Vec3d center;
  double radius = 1.0;
};

struct AxisBox {
  Vec3d min;
  Vec3d max;
};

using Shape = std::variant<Plane, Sphere, AxisBox>;

struct ScenePrimitive {
  Shape shape;
  Rgb albedo{0, 0, 0};
  int semantic_id = 0;
  std::uint32_t entity_id = 1;
};

struct Hit {
  double distance;  ///< along the unit ray
  std::size_t primitive;
};

/// Validated, immutable primitive list.
class Scene {
 public:
  /// Throws Error(InvalidScene) on an empty list, degenerate shapes,
  /// out-of-range labels or duplicate entity ids.
  explicit Scene(std::vector<ScenePrimitive> primitives);

  const std::vector<ScenePrimitive>& primitives() const { return prims_; }

  /// Nearest intersection with distance in (eps, max_distance).
  std::optional<Hit> intersect(const Vec3d& origin, const Vec3d& unit_dir,
                               double max_distance = kSkyDepth) const;

 private:
  std::vector<ScenePrimitive> prims_;
};

/// Scene description JSON: an array of primitives, see docs/formats.md.
Scene parse_scene_json(const std::string& text);
Scene load_scene_file(const std::string& path);

/// Position in meters plus yaw/pitch/roll in degrees. Yaw turns the forward
/// axis toward +x about world up, pitch raises it about camera right, roll
/// turns about camera forward.
struct CameraPose {
  Vec3d position = Vec3d::Zero();
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  /// Camera-to-world rotation.
  Mat3d rotation() const;
  Vec3d forward() const { return rotation().col(2); }
};

struct FaceRasters {
  RgbRaster rgb;
  DepthRaster zdepth;  ///< meters along the face optical axis, +inf for sky
  LabelRaster semantic;
  EntityRaster entity;
};

struct CubeFaceSet {
  CameraPose pose;
  int resolution = 0;
  std::array<FaceRasters, 6> faces;

  FaceRasters& operator[](CubeFace f) { return faces[static_cast<int>(f)]; }
  const FaceRasters& operator[](CubeFace f) const {
    return faces[static_cast<int>(f)];
  }
};

struct ErpFrame {
  CameraPose pose;
  int height = 0;
  int width = 0;
  RgbRaster rgb;
  DepthRaster depth;  ///< slant range in meters, +inf for sky
  LabelRaster semantic;
  EntityRaster entity;
};

CubeFaceSet render_cube(const Scene& scene, const CameraPose& pose,
                        int resolution);

/// Ray-casts every ERP pixel directly; the reference for stitching.
ErpFrame render_erp_direct(const Scene& scene, const CameraPose& pose,
                           int erp_height);

}  // namespace omni360
