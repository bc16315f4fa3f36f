#pragma once

#include "omni360/dataset_io.hpp"
#include "omni360/error.hpp"
#include "omni360/metrics.hpp"
#include "omni360/pedestrians.hpp"
#include "omni360/raster.hpp"
#include "omni360/raycast_scene.hpp"
#include "omni360/rng.hpp"
#include "omni360/sphere_geom.hpp"
#include "omni360/stitcher.hpp"
#include "omni360/trajectory.hpp"
