#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cstdint>
#include <thread>
#include <vector>

namespace omni360 {

/// Row-major single-channel raster; rows() is the image height.
template <typename T>
using Raster = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using DepthRaster = Raster<double>;
using LabelRaster = Raster<std::uint8_t>;
using EntityRaster = Raster<std::uint32_t>;

struct RgbRaster {
  std::array<Raster<std::uint8_t>, 3> channel;

  RgbRaster() = default;
  RgbRaster(Eigen::Index height, Eigen::Index width) {
    for (auto& c : channel) c.setZero(height, width);
  }
  Eigen::Index rows() const { return channel[0].rows(); }
  Eigen::Index cols() const { return channel[0].cols(); }

  friend bool operator==(const RgbRaster& a, const RgbRaster& b) {
    for (int k = 0; k < 3; ++k) {
      if (a.channel[k].rows() != b.channel[k].rows() ||
          a.channel[k].cols() != b.channel[k].cols() ||
          !(a.channel[k] == b.channel[k]).all())
        return false;
    }
    return true;
  }
};

using Rgb = std::array<std::uint8_t, 3>;

/// Runs fn(row) for every row in [0, rows) across hardware threads. Rows
/// must be independent; the result is identical to a serial loop.
template <typename Fn>
void parallel_rows(int rows, Fn&& fn) {
  const int workers = std::max(
      1, std::min<int>(rows, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int r = w; r < rows; r += workers) fn(r);
    });
  }
}

}  // namespace omni360
