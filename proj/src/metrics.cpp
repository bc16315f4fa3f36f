#include "omni360/metrics.hpp"

#include "omni360/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace omni360 {

namespace {

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + ": " + std::to_string(a.cols()) + "x" +
                    std::to_string(a.rows()) + " vs " + std::to_string(b.cols()) + "x" +
                    std::to_string(b.rows()));
}

double polyline(const std::vector<Vec3d>& path) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) len += (path[i + 1] - path[i]).norm();
  return len;
}

}  // namespace

DepthMetrics depth_metrics(const DepthRaster& pred, const DepthRaster& gt,
                           const Raster<bool>* mask) {
  require_same_shape(pred, gt, "depth_metrics");
  if (mask) require_same_shape(*mask, gt, "depth_metrics mask");
  double abs_rel = 0.0, sq = 0.0;
  long inside = 0, count = 0;
  for (Eigen::Index r = 0; r < gt.rows(); ++r) {
    for (Eigen::Index c = 0; c < gt.cols(); ++c) {
      const double d = gt(r, c);
      if (mask && !(*mask)(r, c)) continue;
      if (!std::isfinite(d) || !(d > 0.0)) continue;
      const double p = pred(r, c);
      abs_rel += std::abs(p - d) / d;
      sq += (p - d) * (p - d);
      if (p > 0.0 && std::max(p / d, d / p) < kDeltaThreshold) ++inside;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "depth_metrics: no valid pixels");
  const double n = static_cast<double>(count);
  return {abs_rel / n, std::sqrt(sq / n), static_cast<double>(inside) / n};
}

double miou(const LabelRaster& pred, const LabelRaster& gt, int n_classes) {
  require_same_shape(pred, gt, "miou");
  if (n_classes < 1 || n_classes > 256)
    throw Error(ErrorCode::InvalidArgument, "n_classes must be in [1, 256]");
  std::vector<long> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0), support(n_classes, 0);
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    const int g = gt.data()[i];
    const int p = pred.data()[i];
    if (g < n_classes) ++support[g];
    if (g == p) {
      if (g < n_classes) ++tp[g];
    } else {
      if (g < n_classes) ++fn[g];
      if (p < n_classes) ++fp[p];
    }
  }
  double sum = 0.0;
  int classes = 0;
  for (int k = 0; k < n_classes; ++k) {
    if (support[k] == 0) continue;
    sum += static_cast<double>(tp[k]) / static_cast<double>(tp[k] + fp[k] + fn[k]);
    ++classes;
  }
  if (classes == 0) throw Error(ErrorCode::InvalidArgument, "miou: no class present in ground truth");
  return sum / classes;
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int k = 50; k <= 95; k += 5) t.push_back(k / 100.0);
  return t;
}

double mask_iou(const Mask& a, const Mask& b) {
  require_same_shape(a, b, "mask_iou");
  const auto inter = (a && b).count();
  const auto uni = (a || b).count();
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double average_precision(const std::vector<ScoredMask>& preds, const std::vector<Mask>& gts,
                         double iou_threshold) {
  if (gts.empty()) throw Error(ErrorCode::InvalidArgument, "entity AP: no ground-truth entities");
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].score > preds[b].score;
  });

  std::vector<bool> taken(gts.size(), false);
  std::vector<double> precision, recall;
  long tp = 0, fp = 0;
  for (std::size_t idx : order) {
    double best = -1.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double iou = mask_iou(preds[idx].mask, gts[g]);
      if (iou >= iou_threshold && iou > best) {
        best = iou;
        best_gt = g;
      }
    }
    if (best_gt < gts.size()) {
      taken[best_gt] = true;
      ++tp;
    } else {
      ++fp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
  }

  // Precision envelope from the right, then area over recall steps.
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

double entity_ap(const std::vector<ScoredMask>& preds, const std::vector<Mask>& gts,
                 const std::vector<double>& thresholds) {
  if (gts.empty()) throw Error(ErrorCode::InvalidArgument, "entity AP: no ground-truth entities");
  if (thresholds.empty()) throw Error(ErrorCode::InvalidArgument, "entity AP: no thresholds");
  for (const auto& p : preds) require_same_shape(p.mask, gts.front(), "entity AP");
  for (const auto& g : gts) require_same_shape(g, gts.front(), "entity AP");
  double sum = 0.0;
  for (double t : thresholds) sum += average_precision(preds, gts, t);
  return sum / static_cast<double>(thresholds.size());
}

std::vector<Mask> entity_masks(const EntityRaster& ids, std::uint32_t background) {
  std::vector<std::uint32_t> values(ids.data(), ids.data() + ids.size());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<Mask> masks;
  for (std::uint32_t v : values) {
    if (v == background) continue;
    masks.push_back(ids == v);
  }
  return masks;
}

MpdeAggregate mpde_aggregate(const std::vector<MpdeSet>& sets, MpdeSubset subset) {
  MpdeAggregate agg;
  double dist = 0.0, ang = 0.0;
  for (const auto& s : sets) {
    if (s.count < 0) throw Error(ErrorCode::InvalidArgument, "MPDE set '" + s.name + "' has a negative count");
    if (subset == MpdeSubset::Public && !s.is_public) continue;
    dist += s.distance_error * static_cast<double>(s.count);
    ang += s.angular_error * static_cast<double>(s.count);
    agg.count += s.count;
  }
  if (agg.count == 0) throw Error(ErrorCode::InvalidArgument, "MPDE aggregate over zero samples");
  agg.distance_error = dist / static_cast<double>(agg.count);
  agg.angular_error = ang / static_cast<double>(agg.count);
  return agg;
}

VlnMetrics vln_metrics(const std::vector<VlnEpisode>& episodes) {
  if (episodes.empty()) throw Error(ErrorCode::InvalidArgument, "VLN metrics need at least one episode");
  VlnMetrics m;
  for (const auto& ep : episodes) {
    if (ep.path.empty()) throw Error(ErrorCode::InvalidArgument, "VLN episode with an empty path");
    if (!(ep.shortest_length > 0.0))
      throw Error(ErrorCode::InvalidArgument, "VLN shortest path length must be > 0");
    const double final_dist = (ep.path.back() - ep.goal).norm();
    const bool success = final_dist <= ep.success_radius;
    m.ne += final_dist;
    if (success) {
      m.sr += 1.0;
      m.spl += ep.shortest_length / std::max(polyline(ep.path), ep.shortest_length);
    }
  }
  const double n = static_cast<double>(episodes.size());
  m.sr /= n;
  m.spl /= n;
  m.ne /= n;
  return m;
}

std::string format_report(const std::map<std::string, double>& report) {
  std::string out = "{";
  bool first = true;
  char buf[64];
  for (const auto& [name, value] : report) {
    std::snprintf(buf, sizeof buf, "%.6f", value);
    out += first ? "\n  \"" : ",\n  \"";
    out += name + "\": " + buf;
    first = false;
  }
  out += "\n}\n";
  return out;
}

}  // namespace omni360
