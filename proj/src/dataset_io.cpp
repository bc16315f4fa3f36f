#include "omni360/dataset_io.hpp"

#include "omni360/error.hpp"

#include <png.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace omni360 {

namespace fs = std::filesystem;

namespace {

constexpr int kMaxPfmSide = 1 << 16;

std::uint32_t float_bits(float f) { return std::bit_cast<std::uint32_t>(f); }

void append_le32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
}

std::uint32_t load32(const unsigned char* p, bool little) {
  if (little)
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
  return std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 | std::uint32_t(p[1]) << 16 |
         std::uint32_t(p[0]) << 24;
}

// Next whitespace-delimited header token; the header ends with a single
// whitespace byte after the scale.
std::string_view next_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

template <typename T>
T parse_number(std::string_view tok, const char* what) {
  T value{};
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw Error(ErrorCode::Parse, std::string("PFM: bad ") + what + " '" + std::string(tok) + "'");
  return value;
}

Vec3d vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::Parse, "expected [x,y,z]");
  return Vec3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

nlohmann::json vec3_to_json(const Vec3d& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

void png_fail(const png_image& img, const std::string& what) {
  throw Error(ErrorCode::Io, what + ": " + img.message);
}

std::string encode_png_buffer(const unsigned char* data, int width, int height,
                              png_uint_32 format) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, data, 0, nullptr))
    png_fail(img, "PNG size query failed");
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, data, 0, nullptr))
    png_fail(img, "PNG encode failed");
  out.resize(size);
  return out;
}

std::vector<unsigned char> decode_png_file(const std::string& path, png_uint_32 format,
                                           int& width, int& height) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) png_fail(img, "cannot read PNG " + path);
  img.format = format;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr))
    png_fail(img, "cannot decode PNG " + path);
  width = static_cast<int>(img.width);
  height = static_cast<int>(img.height);
  return buf;
}

}  // namespace

std::string encode_pfm(const Raster<float>& depth) {
  const auto h = depth.rows(), w = depth.cols();
  if (w <= 0 || h <= 0) throw Error(ErrorCode::InvalidArgument, "PFM: empty raster");
  std::string out = "Pf\n" + std::to_string(w) + " " + std::to_string(h) + "\n-1.0\n";
  out.reserve(out.size() + static_cast<std::size_t>(w * h) * 4);
  for (Eigen::Index r = h; r-- > 0;) {
    for (Eigen::Index c = 0; c < w; ++c) {
      float v = depth(r, c);
      if (std::isinf(v) && v > 0.0f) {
        v = 0.0f;
      } else if (!(v > 0.0f) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidDepth, "PFM: depth at (" + std::to_string(c) + "," +
                                                 std::to_string(r) + ") is not positive");
      }
      append_le32(out, float_bits(v));
    }
  }
  return out;
}

Raster<float> decode_pfm(std::string_view bytes) {
  std::size_t pos = 0;
  const auto magic = next_token(bytes, pos);
  if (magic != "Pf") throw Error(ErrorCode::Parse, "PFM: expected single-channel 'Pf' header");
  const int w = parse_number<int>(next_token(bytes, pos), "width");
  const int h = parse_number<int>(next_token(bytes, pos), "height");
  const double scale = parse_number<double>(next_token(bytes, pos), "scale");
  if (w <= 0 || h <= 0 || w > kMaxPfmSide || h > kMaxPfmSide)
    throw Error(ErrorCode::Parse, "PFM: dimensions out of range");
  if (scale == 0.0 || !std::isfinite(scale)) throw Error(ErrorCode::Parse, "PFM: invalid scale");
  if (pos >= bytes.size()) throw Error(ErrorCode::Parse, "PFM: truncated header");
  ++pos;  // single whitespace byte before the raster
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 4;
  if (bytes.size() - pos != need)
    throw Error(ErrorCode::Parse, "PFM: expected " + std::to_string(need) + " data bytes, found " +
                                      std::to_string(bytes.size() - pos));
  const bool little = scale < 0.0;
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  Raster<float> out(h, w);
  for (int r = h - 1; r >= 0; --r) {
    for (int c = 0; c < w; ++c, p += 4) {
      const float v = std::bit_cast<float>(load32(p, little));
      if (v == 0.0f) {
        out(r, c) = std::numeric_limits<float>::infinity();
      } else if (v > 0.0f && std::isfinite(v)) {
        out(r, c) = v;
      } else {
        throw Error(ErrorCode::Parse, "PFM: invalid depth sample");
      }
    }
  }
  return out;
}

void write_depth(const std::string& path, const Raster<float>& depth) {
  write_text_file(path, encode_pfm(depth));
}

Raster<float> read_depth(const std::string& path) { return decode_pfm(read_text_file(path)); }

Raster<float> to_float(const DepthRaster& depth) { return depth.cast<float>(); }

DepthRaster to_double(const Raster<float>& depth) { return depth.cast<double>(); }

Rgb encode_entity(std::uint32_t id) {
  if (id > kMaxEntityId)
    throw Error(ErrorCode::InvalidArgument, "entity id " + std::to_string(id) + " exceeds 2^24-1");
  return {static_cast<std::uint8_t>(id % 256), static_cast<std::uint8_t>((id / 256) % 256),
          static_cast<std::uint8_t>(id / 65536)};
}

std::uint32_t decode_entity(const Rgb& rgb) {
  return std::uint32_t(rgb[0]) + 256u * std::uint32_t(rgb[1]) + 65536u * std::uint32_t(rgb[2]);
}

RgbRaster encode_entity_raster(const EntityRaster& ids) {
  RgbRaster out(ids.rows(), ids.cols());
  for (Eigen::Index i = 0; i < ids.size(); ++i) {
    const Rgb c = encode_entity(ids.data()[i]);
    for (int k = 0; k < 3; ++k) out.channel[k].data()[i] = c[k];
  }
  return out;
}

EntityRaster decode_entity_raster(const RgbRaster& rgb) {
  EntityRaster out(rgb.rows(), rgb.cols());
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out.data()[i] = decode_entity(
        {rgb.channel[0].data()[i], rgb.channel[1].data()[i], rgb.channel[2].data()[i]});
  return out;
}

std::string encode_png(const RgbRaster& rgb) {
  const int h = static_cast<int>(rgb.rows()), w = static_cast<int>(rgb.cols());
  std::vector<unsigned char> interleaved(static_cast<std::size_t>(w) * h * 3);
  for (Eigen::Index i = 0; i < rgb.rows() * rgb.cols(); ++i)
    for (int k = 0; k < 3; ++k) interleaved[3 * i + k] = rgb.channel[k].data()[i];
  return encode_png_buffer(interleaved.data(), w, h, PNG_FORMAT_RGB);
}

std::string encode_png(const LabelRaster& gray) {
  return encode_png_buffer(gray.data(), static_cast<int>(gray.cols()),
                           static_cast<int>(gray.rows()), PNG_FORMAT_GRAY);
}

void write_png(const std::string& path, const RgbRaster& rgb) {
  write_text_file(path, encode_png(rgb));
}

void write_png(const std::string& path, const LabelRaster& gray) {
  write_text_file(path, encode_png(gray));
}

RgbRaster read_png_rgb(const std::string& path) {
  int w = 0, h = 0;
  const auto buf = decode_png_file(path, PNG_FORMAT_RGB, w, h);
  RgbRaster out(h, w);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(w) * h; ++i)
    for (int k = 0; k < 3; ++k) out.channel[k].data()[i] = buf[3 * i + k];
  return out;
}

LabelRaster read_png_gray(const std::string& path) {
  int w = 0, h = 0;
  const auto buf = decode_png_file(path, PNG_FORMAT_GRAY, w, h);
  LabelRaster out(h, w);
  std::memcpy(out.data(), buf.data(), buf.size());
  return out;
}

SemanticPalette load_palette(std::string_view text) {
  SemanticPalette pal;
  std::map<int, int> id_line;
  std::map<std::uint32_t, int> color_line;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    const std::string where = "palette line " + std::to_string(line_no) + ": ";
    if (fields.size() != 5) throw Error(ErrorCode::Parse, where + "expected id,name,r,g,b");
    auto to_int = [&](const std::string& s, int lo, int hi) {
      int v = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < lo || v > hi)
        throw Error(ErrorCode::Parse, where + "'" + s + "' is not an integer in [" +
                                          std::to_string(lo) + "," + std::to_string(hi) + "]");
      return v;
    };
    PaletteEntry e;
    e.id = to_int(fields[0], 0, 255);
    e.name = fields[1];
    if (e.name.empty()) throw Error(ErrorCode::Parse, where + "empty category name");
    for (int k = 0; k < 3; ++k) e.color[k] = static_cast<std::uint8_t>(to_int(fields[2 + k], 0, 255));
    if (auto [it, fresh] = id_line.emplace(e.id, line_no); !fresh)
      throw Error(ErrorCode::Parse, "palette lines " + std::to_string(it->second) + " and " +
                                        std::to_string(line_no) + ": duplicate id " +
                                        std::to_string(e.id));
    if (auto [it, fresh] = color_line.emplace(decode_entity(e.color), line_no); !fresh)
      throw Error(ErrorCode::Parse, "palette lines " + std::to_string(it->second) + " and " +
                                        std::to_string(line_no) + ": duplicate color");
    pal.entries.push_back(std::move(e));
  }
  return pal;
}

bool operator==(const SampleManifest& a, const SampleManifest& b) {
  return a.frame_id == b.frame_id && a.pose.position == b.pose.position &&
         a.pose.yaw == b.pose.yaw && a.pose.pitch == b.pose.pitch && a.pose.roll == b.pose.roll &&
         a.rgb == b.rgb && a.depth == b.depth && a.semantic == b.semantic &&
         a.entity == b.entity && a.keypoints == b.keypoints;
}

nlohmann::json manifest_to_json(const SampleManifest& m) {
  nlohmann::json j;
  j["frame_id"] = m.frame_id;
  j["pose"] = {{"position", vec3_to_json(m.pose.position)},
               {"yaw", m.pose.yaw},
               {"pitch", m.pose.pitch},
               {"roll", m.pose.roll}};
  j["rgb"] = m.rgb;
  j["depth"] = m.depth;
  j["semantic"] = m.semantic;
  j["entity"] = m.entity;
  if (!m.keypoints.empty()) j["keypoints"] = m.keypoints;
  return j;
}

SampleManifest manifest_from_json(const nlohmann::json& j) {
  try {
    SampleManifest m;
    m.frame_id = j.at("frame_id").get<std::string>();
    const auto& pose = j.at("pose");
    m.pose.position = vec3_from_json(pose.at("position"));
    m.pose.yaw = pose.at("yaw").get<double>();
    m.pose.pitch = pose.at("pitch").get<double>();
    m.pose.roll = pose.at("roll").get<double>();
    if (!m.pose.position.allFinite() || !std::isfinite(m.pose.yaw) ||
        !std::isfinite(m.pose.pitch) || !std::isfinite(m.pose.roll))
      throw Error(ErrorCode::Parse, "manifest pose must be finite");
    m.rgb = j.at("rgb").get<std::string>();
    m.depth = j.at("depth").get<std::string>();
    m.semantic = j.at("semantic").get<std::string>();
    m.entity = j.at("entity").get<std::string>();
    m.keypoints = j.value("keypoints", std::string());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
}

void write_manifest(const std::string& path, const SampleManifest& m) {
  write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

SampleManifest read_manifest(const std::string& path, bool check_files) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
  SampleManifest m = manifest_from_json(j);
  if (check_files) {
    const fs::path base = fs::path(path).parent_path();
    for (const std::string* rel : {&m.rgb, &m.depth, &m.semantic, &m.entity, &m.keypoints}) {
      if (rel->empty() && rel == &m.keypoints) continue;
      if (!fs::exists(base / *rel))
        throw Error(ErrorCode::Io, "manifest references missing file " + *rel);
    }
  }
  return m;
}

std::string format_trajectory_csv(const std::vector<TrajectorySample>& rows) {
  std::string out(kTrajectoryCsvHeader);
  out += '\n';
  char buf[32];
  for (const auto& s : rows) {
    const double values[10] = {s.t,      s.p.x(), s.p.y(), s.p.z(), s.v.x(),
                               s.v.y(),  s.v.z(), s.a.x(), s.a.y(), s.a.z()};
    for (int k = 0; k < 10; ++k) {
      // -0 would print as "-0"; normalise so rest rows read 0.
      const double v = values[k] == 0.0 ? 0.0 : values[k];
      std::snprintf(buf, sizeof buf, "%.9g", v);
      if (k) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string format_route_json(const std::vector<Waypoint>& route) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& w : route) j.push_back(vec3_to_json(w));
  return j.dump() + "\n";
}

std::string format_routes_json(const std::vector<std::vector<Waypoint>>& routes) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : routes) {
    nlohmann::json route = nlohmann::json::array();
    for (const auto& w : r) route.push_back(vec3_to_json(w));
    j.push_back(std::move(route));
  }
  return j.dump() + "\n";
}

std::vector<std::vector<Waypoint>> parse_routes_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_array() || j.empty()) throw Error(ErrorCode::Parse, "route file must be a non-empty array");
    auto parse_route = [](const nlohmann::json& r) {
      if (!r.is_array()) throw Error(ErrorCode::Parse, "route must be a list of [x,y,z]");
      std::vector<Waypoint> route;
      for (const auto& p : r) route.push_back(vec3_from_json(p));
      return route;
    };
    // A single route is a list of numeric triples.
    if (j[0].is_array() && !j[0].empty() && j[0][0].is_number()) return {parse_route(j)};
    std::vector<std::vector<Waypoint>> routes;
    for (const auto& r : j) routes.push_back(parse_route(r));
    return routes;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("route file: ") + e.what());
  }
}

nlohmann::json keypoint_frame_json(const PedestrianWorld& world, const CameraPose& cam,
                                   int erp_height, const Scene* scene) {
  const auto joints = export_keypoints(world);
  const auto projected = project_keypoints(world, cam, erp_height, scene);
  const auto truth = mpde_ground_truth(world, cam);
  const auto& skeleton = canonical_skeleton();

  nlohmann::json frame;
  frame["tick"] = world.tick();
  frame["camera"] = {{"position", vec3_to_json(cam.position)},
                     {"yaw", cam.yaw},
                     {"pitch", cam.pitch},
                     {"roll", cam.roll}};
  nlohmann::json agents = nlohmann::json::array();
  for (std::size_t i = 0; i < world.agents().size(); ++i) {
    const Agent& a = world.agents()[i];
    nlohmann::json js = nlohmann::json::array();
    nlohmann::json erp = nlohmann::json::array();
    for (int k = 0; k < kJointCount; ++k) {
      js.push_back({{"name", std::string(skeleton[k].name)},
                    {"x", joints[i][k].x()},
                    {"y", joints[i][k].y()},
                    {"z", joints[i][k].z()}});
      const auto& p = projected[i][k];
      erp.push_back({{"u", p.erp.u}, {"v", p.erp.v}, {"depth", p.depth}, {"visible", p.visible}});
    }
    agents.push_back({{"id", a.id},
                      {"state", std::string(activity_name(a.state.activity))},
                      {"joints", std::move(js)},
                      {"erp", std::move(erp)},
                      {"gt", {{"distance", truth[i].distance}, {"angle", truth[i].angle_deg}}}});
  }
  frame["agents"] = std::move(agents);
  return frame;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace omni360
