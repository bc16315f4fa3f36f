#include "omni360/raycast_scene.hpp"

#include "omni360/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace omni360 {

namespace {

constexpr double kRayEpsilon = 1e-9;

std::optional<double> intersect_shape(const Plane& p, const Vec3d& o,
                                      const Vec3d& d) {
  const double denom = p.normal.dot(d);
  if (denom == 0.0) return std::nullopt;
  const double t = (p.offset - p.normal.dot(o)) / denom;
  if (t > kRayEpsilon) return t;
  return std::nullopt;
}

std::optional<double> intersect_shape(const Sphere& s, const Vec3d& o,
                                      const Vec3d& d) {
  const Vec3d oc = o - s.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = b > 0.0 ? -b - root : -b + root;
  double t0 = q;
  double t1 = q != 0.0 ? c / q : -b;
  if (t0 > t1) std::swap(t0, t1);
  if (t0 > kRayEpsilon) return t0;
  if (t1 > kRayEpsilon) return t1;
  return std::nullopt;
}

std::optional<double> intersect_shape(const AxisBox& b, const Vec3d& o,
                                      const Vec3d& d) {
  double t_near = -kSkyDepth;
  double t_far = kSkyDepth;
  for (int k = 0; k < 3; ++k) {
    if (d[k] == 0.0) {
      if (o[k] < b.min[k] || o[k] > b.max[k]) return std::nullopt;
      continue;
    }
    double t0 = (b.min[k] - o[k]) / d[k];
    double t1 = (b.max[k] - o[k]) / d[k];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near > kRayEpsilon) return t_near;
  if (t_far > kRayEpsilon) return t_far;
  return std::nullopt;
}

Vec3d json_vec3(const nlohmann::json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throw Error(ErrorCode::InvalidScene,
                std::string("field '") + key + "' must be a 3-element array");
  return Vec3d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

template <typename Fill>
void fill_pixel(const Scene& scene, const std::optional<Hit>& hit, Fill&& fill) {
  if (!hit) {
    fill(kSkyDepth, kSkyColor, kSkySemantic, kBackgroundEntity);
    return;
  }
  const ScenePrimitive& p = scene.primitives()[hit->primitive];
  fill(hit->distance, p.albedo, static_cast<std::uint8_t>(p.semantic_id),
       p.entity_id);
}

}  // namespace

Scene::Scene(std::vector<ScenePrimitive> primitives) : prims_(std::move(primitives)) {
  if (prims_.empty()) throw Error(ErrorCode::InvalidScene, "scene is empty");
  std::set<std::uint32_t> entities;
  for (std::size_t i = 0; i < prims_.size(); ++i) {
    auto& p = prims_[i];
    const std::string where = "primitive " + std::to_string(i) + ": ";
    if (p.semantic_id < 0 || p.semantic_id > 255)
      throw Error(ErrorCode::InvalidScene, where + "semantic_id outside [0,255]");
    if (p.entity_id == kBackgroundEntity || p.entity_id > kMaxEntityId)
      throw Error(ErrorCode::InvalidScene,
                  where + "entity_id outside [1, 2^24) (0 is the background)");
    if (!entities.insert(p.entity_id).second)
      throw Error(ErrorCode::InvalidScene,
                  where + "duplicate entity_id " + std::to_string(p.entity_id));
    if (auto* plane = std::get_if<Plane>(&p.shape)) {
      const double n = plane->normal.norm();
      if (!(n > 0.0) || !std::isfinite(n) || !std::isfinite(plane->offset))
        throw Error(ErrorCode::InvalidScene, where + "plane normal must be non-zero");
      plane->normal /= n;
      plane->offset /= n;
    } else if (auto* sphere = std::get_if<Sphere>(&p.shape)) {
      if (!(sphere->radius > 0.0) || !sphere->center.allFinite() ||
          !std::isfinite(sphere->radius))
        throw Error(ErrorCode::InvalidScene, where + "sphere radius must be > 0");
    } else if (auto* box = std::get_if<AxisBox>(&p.shape)) {
      if (!(box->min.array() < box->max.array()).all() || !box->min.allFinite() ||
          !box->max.allFinite())
        throw Error(ErrorCode::InvalidScene, where + "box requires min < max");
    }
  }
}

std::optional<Hit> Scene::intersect(const Vec3d& origin, const Vec3d& unit_dir,
                                    double max_distance) const {
  std::optional<Hit> best;
  double limit = max_distance;
  for (std::size_t i = 0; i < prims_.size(); ++i) {
    const auto t = std::visit(
        [&](const auto& s) { return intersect_shape(s, origin, unit_dir); },
        prims_[i].shape);
    if (t && *t < limit) {
      limit = *t;
      best = Hit{*t, i};
    }
  }
  return best;
}

Scene parse_scene_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("scene JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::InvalidScene, "scene must be a JSON array");
  std::vector<ScenePrimitive> prims;
  try {
    for (const auto& j : doc) {
      ScenePrimitive p;
      const auto kind = j.at("shape").get<std::string>();
      if (kind == "plane") {
        p.shape = Plane{json_vec3(j, "normal"), j.at("offset").get<double>()};
      } else if (kind == "sphere") {
        p.shape = Sphere{json_vec3(j, "center"), j.at("radius").get<double>()};
      } else if (kind == "box") {
        p.shape = AxisBox{json_vec3(j, "min"), json_vec3(j, "max")};
      } else {
        throw Error(ErrorCode::InvalidScene, "unknown shape '" + kind + "'");
      }
      const auto& albedo = j.at("albedo");
      if (!albedo.is_array() || albedo.size() != 3)
        throw Error(ErrorCode::InvalidScene, "albedo must be [r,g,b]");
      for (int k = 0; k < 3; ++k) {
        const int c = albedo[k].get<int>();
        if (c < 0 || c > 255) throw Error(ErrorCode::InvalidScene, "albedo outside [0,255]");
        p.albedo[k] = static_cast<std::uint8_t>(c);
      }
      p.semantic_id = j.at("semantic_id").get<int>();
      const auto entity = j.at("entity_id").get<std::int64_t>();
      if (entity < 0 || entity > kMaxEntityId)
        throw Error(ErrorCode::InvalidScene, "entity_id outside [1, 2^24)");
      p.entity_id = static_cast<std::uint32_t>(entity);
      prims.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidScene, std::string("scene JSON: ") + e.what());
  }
  return Scene(std::move(prims));
}

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scene file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_json(ss.str());
}

Mat3d CameraPose::rotation() const {
  constexpr double deg = std::numbers::pi / 180.0;
  const double cy = std::cos(yaw * deg), sy = std::sin(yaw * deg);
  const double cp = std::cos(pitch * deg), sp = std::sin(pitch * deg);
  const double cr = std::cos(roll * deg), sr = std::sin(roll * deg);
  Mat3d ry, rx, rz;
  ry << cy, 0, sy,  //
      0, 1, 0,      //
      -sy, 0, cy;
  rx << 1, 0, 0,  //
      0, cp, sp,  //
      0, -sp, cp;
  rz << cr, -sr, 0,  //
      sr, cr, 0,     //
      0, 0, 1;
  return ry * rx * rz;
}

CubeFaceSet render_cube(const Scene& scene, const CameraPose& pose, int resolution) {
  if (resolution < 2)
    throw Error(ErrorCode::InvalidArgument, "cube resolution must be >= 2");
  CubeFaceSet out;
  out.pose = pose;
  out.resolution = resolution;
  const Mat3d rot = pose.rotation();
  const int n = resolution;
  for (CubeFace face : kAllFaces) {
    FaceRasters& fr = out[face];
    fr.rgb = RgbRaster(n, n);
    fr.zdepth.resize(n, n);
    fr.semantic.resize(n, n);
    fr.entity.resize(n, n);
    parallel_rows(n, [&](int row) {
      for (int col = 0; col < n; ++col) {
        const CubeCoord<double> cc{face, face_tangent(col, n), face_tangent(row, n)};
        const Vec3d ray = cube_ray(cc);
        const double ray_len = ray.norm();
        const Vec3d dir = rot * (ray / ray_len);
        fill_pixel(scene, scene.intersect(pose.position, dir),
                   [&](double dist, const Rgb& c, std::uint8_t sem, std::uint32_t ent) {
                     fr.zdepth(row, col) = std::isfinite(dist) ? dist / ray_len : dist;
                     for (int k = 0; k < 3; ++k) fr.rgb.channel[k](row, col) = c[k];
                     fr.semantic(row, col) = sem;
                     fr.entity(row, col) = ent;
                   });
      }
    });
  }
  return out;
}

ErpFrame render_erp_direct(const Scene& scene, const CameraPose& pose, int erp_height) {
  if (erp_height < 2)
    throw Error(ErrorCode::InvalidArgument, "ERP height must be >= 2");
  ErpFrame out;
  out.pose = pose;
  out.height = erp_height;
  out.width = 2 * erp_height;
  out.rgb = RgbRaster(out.height, out.width);
  out.depth.resize(out.height, out.width);
  out.semantic.resize(out.height, out.width);
  out.entity.resize(out.height, out.width);
  const Mat3d rot = pose.rotation();
  parallel_rows(out.height, [&](int row) {
    for (int col = 0; col < out.width; ++col) {
      const Vec3d dir = rot * erp_pixel_dir(col, row, out.width, out.height);
      fill_pixel(scene, scene.intersect(pose.position, dir),
                 [&](double dist, const Rgb& c, std::uint8_t sem, std::uint32_t ent) {
                   out.depth(row, col) = dist;
                   for (int k = 0; k < 3; ++k) out.rgb.channel[k](row, col) = c[k];
                   out.semantic(row, col) = sem;
                   out.entity(row, col) = ent;
                 });
    }
  });
  return out;
}

}  // namespace omni360
