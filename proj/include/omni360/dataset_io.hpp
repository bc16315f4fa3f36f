#pragma once

// File formats: PFM depth, PNG rasters, entity color packing, semantic
// palettes, sample manifests, trajectory CSV, route and keypoint JSON.

#include "omni360/pedestrians.hpp"
#include "omni360/raster.hpp"
#include "omni360/raycast_scene.hpp"
#include "omni360/trajectory.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace omni360 {

// --- depth (PFM) ---------------------------------------------------------

/// Little-endian single-channel PFM ("Pf", scale -1.0), rows bottom to top.
/// +inf (sky) is stored as 0.0. Throws Error(InvalidDepth) for negative,
/// zero or NaN samples.
std::string encode_pfm(const Raster<float>& depth);

/// Inverse of encode_pfm; 0.0 reads back as +inf. Big-endian files
/// (positive scale) are accepted. Throws Error(Parse) on malformed input.
Raster<float> decode_pfm(std::string_view bytes);

void write_depth(const std::string& path, const Raster<float>& depth);
Raster<float> read_depth(const std::string& path);

Raster<float> to_float(const DepthRaster& depth);
DepthRaster to_double(const Raster<float>& depth);

// --- entity ids ----------------------------------------------------------

/// r = id mod 256, g = (id / 256) mod 256, b = id / 65536.
Rgb encode_entity(std::uint32_t id);
std::uint32_t decode_entity(const Rgb& rgb);

RgbRaster encode_entity_raster(const EntityRaster& ids);
EntityRaster decode_entity_raster(const RgbRaster& rgb);

// --- PNG -----------------------------------------------------------------

std::string encode_png(const RgbRaster& rgb);
std::string encode_png(const LabelRaster& gray);
void write_png(const std::string& path, const RgbRaster& rgb);
void write_png(const std::string& path, const LabelRaster& gray);
RgbRaster read_png_rgb(const std::string& path);
LabelRaster read_png_gray(const std::string& path);

// --- semantic palette ----------------------------------------------------

struct PaletteEntry {
  int id = 0;
  std::string name;
  Rgb color{0, 0, 0};
};

struct SemanticPalette {
  std::vector<PaletteEntry> entries;
};

/// CSV lines `id,name,r,g,b`; blank lines and lines starting with '#' are
/// skipped. Throws Error(Parse) naming the offending line(s).
SemanticPalette load_palette(std::string_view text);

// --- manifest ------------------------------------------------------------

struct SampleManifest {
  std::string frame_id;
  CameraPose pose;
  std::string rgb;
  std::string depth;
  std::string semantic;
  std::string entity;
  std::string keypoints;  ///< optional, may be empty

  friend bool operator==(const SampleManifest& a, const SampleManifest& b);
};

nlohmann::json manifest_to_json(const SampleManifest& m);
SampleManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const std::string& path, const SampleManifest& m);
/// Referenced files are resolved relative to the manifest directory and
/// must exist when check_files is set (Error(Io) otherwise).
SampleManifest read_manifest(const std::string& path, bool check_files = true);

// --- trajectories and routes ---------------------------------------------

inline constexpr std::string_view kTrajectoryCsvHeader = "t,x,y,z,vx,vy,vz,ax,ay,az";

/// Header plus one row per sample, every value printed with %.9g.
std::string format_trajectory_csv(const std::vector<TrajectorySample>& rows);

/// A route is a JSON list of [x,y,z]; a route file may also hold a list of
/// routes.
std::string format_route_json(const std::vector<Waypoint>& route);
std::string format_routes_json(const std::vector<std::vector<Waypoint>>& routes);
std::vector<std::vector<Waypoint>> parse_routes_json(std::string_view text);

// --- pedestrian keypoints ------------------------------------------------

nlohmann::json keypoint_frame_json(const PedestrianWorld& world, const CameraPose& cam,
                                   int erp_height, const Scene* scene);

// --- misc ----------------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace omni360
