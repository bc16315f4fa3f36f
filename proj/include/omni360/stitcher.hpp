#pragma once

// Cube faces -> equirectangular frame: bilinear RGB, nearest-neighbor labels,
// z-depth converted to slant range.

#include "omni360/raycast_scene.hpp"

namespace omni360 {

/// Slant range of a face sample with z-depth z at tangent coords (s, t).
/// Throws Error(InvalidDepth) for z <= 0; +inf passes through.
double zdepth_to_slant(double z, double s, double t);

enum class DepthSampling {
  /// Bilinear in inverse depth when the four source samples belong to the
  /// same entity and are finite, nearest-neighbor otherwise. Inverse z-depth
  /// is affine in (s, t) over a plane, so planar surfaces are reproduced
  /// exactly.
  GuardedInverseBilinear,
  /// Nearest source sample converted with its own tangent coordinates.
  Nearest,
};

/// Throws Error(ShapeMismatch) when face rasters disagree in size and
/// Error(InvalidDepth) for non-positive z-depth samples.
ErpFrame stitch(const CubeFaceSet& faces, int erp_height,
                DepthSampling depth_mode = DepthSampling::GuardedInverseBilinear);

}  // namespace omni360
