#pragma once

// Scenes shared by the unit and acceptance suites.

#include "omni360/raycast_scene.hpp"

#include <vector>

namespace omni360::fixtures {

inline constexpr double kCameraHeight = 1.6;

/// Infinite ground plane 1.6 m below the camera.
inline Scene ground_plane() {
  return Scene({{Plane{Vec3d(0, 1, 0), -kCameraHeight}, {90, 90, 90}, 1, 1}});
}

/// Off-center sphere enclosing the camera, with a smaller ball inside.
inline Scene enclosing_sphere() {
  return Scene({{Sphere{Vec3d(0.3, 0.2, -0.1), 10.0}, {200, 100, 50}, 2, 1},
                {Sphere{Vec3d(2.0, 0.0, 4.0), 1.0}, {20, 200, 50}, 3, 2}});
}

/// Ground plane between two long walls, closed at one end; sky above.
inline Scene box_canyon() {
  return Scene({{Plane{Vec3d(0, 1, 0), -2.0}, {90, 90, 90}, 1, 1},
                {AxisBox{Vec3d(-6, -2, -50), Vec3d(-4, 10, 50)}, {200, 0, 0}, 4, 2},
                {AxisBox{Vec3d(4, -2, -50), Vec3d(6, 10, 50)}, {0, 200, 0}, 4, 3},
                {AxisBox{Vec3d(-4, -2, 30), Vec3d(4, 6, 32)}, {0, 0, 200}, 5, 4}});
}

/// Several objects over a ground plane for label stitching.
inline Scene label_street() {
  return Scene({{Plane{Vec3d(0, 1, 0), -1.6}, {90, 90, 90}, 1, 1},
                {Sphere{Vec3d(0.0, 0.0, 5.0), 1.0}, {250, 0, 0}, 7, 2},
                {Sphere{Vec3d(-4.0, 1.0, -3.0), 1.5}, {0, 250, 0}, 8, 3},
                {AxisBox{Vec3d(3, -1.6, -2), Vec3d(5, 3, 2)}, {0, 0, 250}, 9, 4},
                {AxisBox{Vec3d(-8, -1.6, 6), Vec3d(-6, 6, 9)}, {250, 250, 0}, 9, 70000}});
}

inline std::vector<Scene> depth_fixtures() {
  return {ground_plane(), enclosing_sphere(), box_canyon()};
}

}  // namespace omni360::fixtures
