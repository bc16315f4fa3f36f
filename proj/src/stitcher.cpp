#include "omni360/stitcher.hpp"

#include "omni360/error.hpp"

#include <cmath>

namespace omni360 {

namespace {

void check_faces(const CubeFaceSet& faces) {
  const Eigen::Index n = faces.resolution;
  if (n < 2) throw Error(ErrorCode::ShapeMismatch, "cube resolution must be >= 2");
  for (CubeFace f : kAllFaces) {
    const FaceRasters& r = faces[f];
    const bool ok = r.rgb.rows() == n && r.rgb.cols() == n && r.zdepth.rows() == n &&
                    r.zdepth.cols() == n && r.semantic.rows() == n &&
                    r.semantic.cols() == n && r.entity.rows() == n &&
                    r.entity.cols() == n;
    for (const auto& c : r.rgb.channel) {
      if (c.rows() != n || c.cols() != n)
        throw Error(ErrorCode::ShapeMismatch,
                    std::string("face ") + std::string(face_name(f)) +
                        " rgb channels differ in size");
    }
    if (!ok)
      throw Error(ErrorCode::ShapeMismatch,
                  std::string("face ") + std::string(face_name(f)) + " is not " +
                      std::to_string(n) + "x" + std::to_string(n));
    if (!(r.zdepth > 0.0).all())
      throw Error(ErrorCode::InvalidDepth,
                  std::string("face ") + std::string(face_name(f)) +
                      " has non-positive z-depth samples");
  }
}

// Border-clamped bilinear fetch, continuous pixel coordinates with pixel
// centers at integers.
std::uint8_t bilinear(const Raster<std::uint8_t>& img, double x, double y) {
  const Eigen::Index n = img.cols();
  x = std::clamp(x, 0.0, static_cast<double>(n - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.rows() - 1));
  const Eigen::Index x0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(x), n - 2);
  const Eigen::Index y0 =
      std::min<Eigen::Index>(static_cast<Eigen::Index>(y), img.rows() - 2);
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  const double top = (1.0 - fx) * img(y0, x0) + fx * img(y0, x0 + 1);
  const double bottom = (1.0 - fx) * img(y0 + 1, x0) + fx * img(y0 + 1, x0 + 1);
  const double v = (1.0 - fy) * top + fy * bottom;
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Slant range at (s, t) from the 2x2 block around continuous pixel (px, py).
// Weights may extrapolate by half a pixel at face borders. Returns a
// negative value when the block is not a single finite surface.
double guarded_inverse_depth(const FaceRasters& src, double px, double py, double s,
                             double t) {
  const Eigen::Index n = src.zdepth.cols();
  const Eigen::Index x0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(px)), 0, n - 2);
  const Eigen::Index y0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(py)), 0, n - 2);
  const double fx = px - static_cast<double>(x0);
  const double fy = py - static_cast<double>(y0);
  const std::uint32_t id = src.entity(y0, x0);
  double inv[2][2];
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const double z = src.zdepth(y0 + dy, x0 + dx);
      if (!std::isfinite(z) || src.entity(y0 + dy, x0 + dx) != id) return -1.0;
      inv[dy][dx] = 1.0 / z;
    }
  }
  const double top = (1.0 - fx) * inv[0][0] + fx * inv[0][1];
  const double bottom = (1.0 - fx) * inv[1][0] + fx * inv[1][1];
  const double inv_z = (1.0 - fy) * top + fy * bottom;
  if (!(inv_z > 0.0)) return -1.0;
  return zdepth_to_slant(1.0 / inv_z, s, t);
}

}  // namespace

double zdepth_to_slant(double z, double s, double t) {
  if (!(z > 0.0))
    throw Error(ErrorCode::InvalidDepth, "z-depth sample must be positive");
  if (std::isinf(z)) return z;
  return z * std::sqrt(1.0 + s * s + t * t);
}

ErpFrame stitch(const CubeFaceSet& faces, int erp_height, DepthSampling depth_mode) {
  if (erp_height < 2) throw Error(ErrorCode::InvalidArgument, "ERP height must be >= 2");
  check_faces(faces);
  const int n = faces.resolution;
  ErpFrame out;
  out.pose = faces.pose;
  out.height = erp_height;
  out.width = 2 * erp_height;
  out.rgb = RgbRaster(out.height, out.width);
  out.depth.resize(out.height, out.width);
  out.semantic.resize(out.height, out.width);
  out.entity.resize(out.height, out.width);

  parallel_rows(out.height, [&](int row) {
    for (int col = 0; col < out.width; ++col) {
      const CubeCoord<double> c = dir_to_cube(erp_pixel_dir(col, row, out.width, out.height));
      const FaceRasters& src = faces[c.face];

      const double px = (c.s + 1.0) * 0.5 * n - 0.5;
      const double py = (c.t + 1.0) * 0.5 * n - 0.5;
      for (int k = 0; k < 3; ++k)
        out.rgb.channel[k](row, col) = bilinear(src.rgb.channel[k], px, py);

      const int ix = nearest_face_pixel(c.s, n);
      const int iy = nearest_face_pixel(c.t, n);
      out.semantic(row, col) = src.semantic(iy, ix);
      out.entity(row, col) = src.entity(iy, ix);
      double depth = -1.0;
      if (depth_mode == DepthSampling::GuardedInverseBilinear)
        depth = guarded_inverse_depth(src, px, py, c.s, c.t);
      if (depth < 0.0)
        depth = zdepth_to_slant(src.zdepth(iy, ix), face_tangent(ix, n), face_tangent(iy, n));
      out.depth(row, col) = depth;
    }
  });
  return out;
}

}  // namespace omni360
