#pragma once

// Evaluation kernels: depth, semantic and entity segmentation, pedestrian
// distance aggregation, and navigation metrics.

#include "omni360/raster.hpp"
#include "omni360/sphere_geom.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace omni360 {

struct DepthMetrics {
  double absrel = 0.0;
  double rmse = 0.0;
  double delta1 = 0.0;
};

inline constexpr double kDeltaThreshold = 1.25;

/// Over pixels where the mask (if any) is set and gt is finite and positive.
/// Throws Error(ShapeMismatch) on size mismatch and Error(InvalidArgument)
/// when no pixel is valid.
DepthMetrics depth_metrics(const DepthRaster& pred, const DepthRaster& gt,
                           const Raster<bool>* mask = nullptr);

/// Mean IoU over classes present in gt; classes are label values < n_classes.
double miou(const LabelRaster& pred, const LabelRaster& gt, int n_classes = 256);

using Mask = Raster<bool>;

struct ScoredMask {
  Mask mask;
  double score = 1.0;
};

/// IoU thresholds 0.50:0.05:0.95.
std::vector<double> coco_iou_thresholds();

double mask_iou(const Mask& a, const Mask& b);

/// AP at one IoU threshold: greedy score-ordered matching, all-point
/// interpolated precision/recall area.
double average_precision(const std::vector<ScoredMask>& preds, const std::vector<Mask>& gts,
                         double iou_threshold);

/// Mean of average_precision over `thresholds`. Throws
/// Error(InvalidArgument) if gts is empty.
double entity_ap(const std::vector<ScoredMask>& preds, const std::vector<Mask>& gts,
                 const std::vector<double>& thresholds = coco_iou_thresholds());

/// One binary mask per distinct non-background id, ascending id order.
std::vector<Mask> entity_masks(const EntityRaster& ids, std::uint32_t background = 0);

struct MpdeSet {
  std::string name;
  double distance_error = 0.0;  ///< mean, m
  double angular_error = 0.0;   ///< mean, deg
  long count = 0;
  bool is_public = true;
};

enum class MpdeSubset { All, Public };

struct MpdeAggregate {
  double distance_error = 0.0;
  double angular_error = 0.0;
  long count = 0;
};

/// Sample-count-weighted means. Throws Error(InvalidArgument) when no set
/// with a positive count participates.
MpdeAggregate mpde_aggregate(const std::vector<MpdeSet>& sets, MpdeSubset subset);

struct VlnEpisode {
  double success_radius = 3.0;     ///< m
  Vec3d goal = Vec3d::Zero();
  std::vector<Vec3d> path;         ///< executed polyline
  double shortest_length = 1.0;    ///< m
};

struct VlnMetrics {
  double sr = 0.0;
  double spl = 0.0;
  double ne = 0.0;
};

VlnMetrics vln_metrics(const std::vector<VlnEpisode>& episodes);

/// {"name": value, ...} with six-decimal fixed formatting, keys sorted.
std::string format_report(const std::map<std::string, double>& report);

}  // namespace omni360
