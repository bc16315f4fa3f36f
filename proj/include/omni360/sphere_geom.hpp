#pragma once

// Conversions between equirectangular (ERP) coordinates, unit directions and
// cube-face tangent coordinates.
//
// World/camera frame: +x right, +y up, +z forward (Front face).
// ERP: longitude = 2*pi*u - pi, latitude = pi/2 - pi*v.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <numbers>
#include <string_view>

namespace omni360 {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;

/// Unit viewing direction.
template <typename Scalar>
using Direction = Vec3<Scalar>;

template <typename Scalar>
struct ErpCoord {
  Scalar u{0.5};
  Scalar v{0.5};
};

enum class CubeFace : int { Front = 0, Back, Right, Left, Up, Down };

inline constexpr std::array<CubeFace, 6> kAllFaces = {
    CubeFace::Front, CubeFace::Back, CubeFace::Right,
    CubeFace::Left,  CubeFace::Up,   CubeFace::Down};

constexpr std::string_view face_name(CubeFace f) {
  switch (f) {
    case CubeFace::Front: return "front";
    case CubeFace::Back: return "back";
    case CubeFace::Right: return "right";
    case CubeFace::Left: return "left";
    case CubeFace::Up: return "up";
    case CubeFace::Down: return "down";
  }
  return "?";
}

template <typename Scalar>
struct CubeCoord {
  CubeFace face{CubeFace::Front};
  Scalar s{0};
  Scalar t{0};
};

/// Basis of a cube face: a direction on the face plane is
/// axis + s * s_axis + t * t_axis.
template <typename Scalar>
struct FaceFrame {
  Vec3<Scalar> axis;
  Vec3<Scalar> s_axis;
  Vec3<Scalar> t_axis;
};

template <typename Scalar = double>
FaceFrame<Scalar> face_frame(CubeFace f) {
  using V = Vec3<Scalar>;
  switch (f) {
    case CubeFace::Front: return {V(0, 0, 1), V(1, 0, 0), V(0, -1, 0)};
    case CubeFace::Back: return {V(0, 0, -1), V(-1, 0, 0), V(0, -1, 0)};
    case CubeFace::Right: return {V(1, 0, 0), V(0, 0, -1), V(0, -1, 0)};
    case CubeFace::Left: return {V(-1, 0, 0), V(0, 0, 1), V(0, -1, 0)};
    case CubeFace::Up: return {V(0, 1, 0), V(1, 0, 0), V(0, 0, 1)};
    case CubeFace::Down: return {V(0, -1, 0), V(1, 0, 0), V(0, 0, -1)};
  }
  return {V(0, 0, 1), V(1, 0, 0), V(0, -1, 0)};
}

template <typename Scalar>
Direction<Scalar> erp_to_dir(const ErpCoord<Scalar>& c) {
  using std::cos;
  using std::sin;
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar lon = Scalar(2) * pi * c.u - pi;
  const Scalar lat = pi / Scalar(2) - pi * c.v;
  const Scalar cl = cos(lat);
  return Direction<Scalar>(cl * sin(lon), sin(lat), cl * cos(lon));
}

/// Inverse of erp_to_dir. u is wrapped into [0,1); the longitude seam
/// (direction -z) lands on u = 0. At the poles u is 0.5.
template <typename Scalar>
ErpCoord<Scalar> dir_to_erp(const Direction<Scalar>& d) {
  using std::atan2;
  using std::hypot;
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar horiz = hypot(d.x(), d.z());
  const Scalar lat = atan2(d.y(), horiz);
  ErpCoord<Scalar> c;
  c.v = Scalar(0.5) - lat / pi;
  if (horiz == Scalar(0)) {
    c.u = Scalar(0.5);
    return c;
  }
  Scalar u = (atan2(d.x(), d.z()) + pi) / (Scalar(2) * pi);
  if (u >= Scalar(1)) u -= Scalar(1);
  if (u < Scalar(0)) u += Scalar(1);
  c.u = u;
  return c;
}

/// Face is the signed dominant axis; ties resolve by the enum order
/// Front > Back > Right > Left > Up > Down.
template <typename Scalar>
CubeCoord<Scalar> dir_to_cube(const Direction<Scalar>& d) {
  using std::abs;
  const Scalar ax = abs(d.x()), ay = abs(d.y()), az = abs(d.z());
  CubeFace face;
  if (az >= ax && az >= ay) {
    face = d.z() >= Scalar(0) ? CubeFace::Front : CubeFace::Back;
  } else if (ax >= ay) {
    face = d.x() >= Scalar(0) ? CubeFace::Right : CubeFace::Left;
  } else {
    face = d.y() >= Scalar(0) ? CubeFace::Up : CubeFace::Down;
  }
  const FaceFrame<Scalar> fr = face_frame<Scalar>(face);
  const Scalar major = d.dot(fr.axis);
  return {face, d.dot(fr.s_axis) / major, d.dot(fr.t_axis) / major};
}

/// Unnormalized ray through (s,t) whose optical-axis component is 1.
template <typename Scalar>
Vec3<Scalar> cube_ray(const CubeCoord<Scalar>& c) {
  const FaceFrame<Scalar> fr = face_frame<Scalar>(c.face);
  return fr.axis + c.s * fr.s_axis + c.t * fr.t_axis;
}

template <typename Scalar>
Direction<Scalar> cube_to_dir(const CubeCoord<Scalar>& c) {
  return cube_ray(c).normalized();
}

/// Pixel-center convention: index i of n samples sits at (i + 0.5) / n.
template <typename Scalar = double>
constexpr Scalar pixel_center(int i, int n) {
  return (Scalar(i) + Scalar(0.5)) / Scalar(n);
}

/// Tangent coordinate in [-1,1] of face pixel i out of n.
template <typename Scalar = double>
constexpr Scalar face_tangent(int i, int n) {
  return Scalar(2) * pixel_center<Scalar>(i, n) - Scalar(1);
}

/// Index of the face pixel whose footprint contains tangent coordinate s.
template <typename Scalar>
int nearest_face_pixel(Scalar s, int n) {
  using std::floor;
  int i = static_cast<int>(floor((s + Scalar(1)) * Scalar(0.5) * Scalar(n)));
  return i < 0 ? 0 : (i >= n ? n - 1 : i);
}

/// Direction of ERP pixel (col, row) in a width x height raster.
template <typename Scalar = double>
Direction<Scalar> erp_pixel_dir(int col, int row, int width, int height) {
  return erp_to_dir(ErpCoord<Scalar>{pixel_center<Scalar>(col, width),
                                     pixel_center<Scalar>(row, height)});
}

}  // namespace omni360
