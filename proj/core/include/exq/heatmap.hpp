#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "exq/landmarks.hpp"
#include "exq/tensor.hpp"

namespace exq {

/// Unnormalised Gaussian splat: weights(i, j) = exp(-((i-c)^2 + (j-c)^2) / (2 sigma^2))
/// with c = (size-1)/2, so the centre weight is exactly 1.
class GaussianKernel {
 public:
  GaussianKernel(double sigma, std::size_t size);

  double sigma() const { return sigma_; }
  std::size_t size() const { return size_; }
  std::size_t radius() const { return size_ / 2; }
  double at(std::size_t i, std::size_t j) const { return weights_.at(i, j); }
  const Tensor& weights() const { return weights_; }

 private:
  double sigma_;
  std::size_t size_;
  Tensor weights_;
};

GaussianKernel build_kernel(double sigma, std::size_t size);

/// Pixel a landmark is splatted onto: (round(y), round(x)), halves rounded up.
long landmark_row(const Point& p);
long landmark_col(const Point& p);

/// Sum of kernels centred on each landmark, clipped to an h×w frame.
Tensor accumulate(std::span<const Point> points, const GaussianKernel& kernel, std::size_t h, std::size_t w);

/// One pass of a 3×3 mean filter with edge replication.
Tensor box_smooth3(const Tensor& grid);

/// Per-grid min-max scaling to [0, 1]. A constant grid maps to all zeros.
Tensor min_max_normalize(const Tensor& grid);

Tensor smooth_and_normalize(const Tensor& acc);

/// Multiplies each channel of a [C×H×W] frame by an [H×W] weight grid.
Tensor weight_rgb(const Tensor& weights, const Tensor& rgb);

/// Half-pixel-centre bilinear resize of a [C×H×W] stack, edges clamped.
Tensor resize_bilinear(const Tensor& planes, std::size_t out_h, std::size_t out_w);

/// Binary grid: 1 at each landmark's rounded pixel inside the frame.
Tensor position_mask(std::span<const Point> points, std::size_t h, std::size_t w);

enum class HeatmapMode { gaussian, positions_only };
HeatmapMode parse_heatmap_mode(const std::string& s);
std::string to_string(HeatmapMode m);

struct HeatmapConfig {
  double sigma = 1.0;
  std::size_t kernel_size = 11;
  HeatmapMode mode = HeatmapMode::gaussian;
  std::size_t out_height = 16;
  std::size_t out_width = 16;
  bool smoothing = true;
};

/// Landmark weight grid of one frame, before any resizing.
Tensor frame_weights(std::span<const Point> points, const HeatmapConfig& cfg, std::size_t h, std::size_t w);

struct HeatmapVolume {
  Tensor data;  ///< [T × 3 × out_height × out_width]
  HeatmapMode mode = HeatmapMode::gaussian;
};

/// Landmark-weighted RGB volume. `frames` is [T×3×H×W] aligned by position
/// with seq.frames; H and W must match the sequence extents.
HeatmapVolume build_volume(const LandmarkSequence& seq, const Tensor& frames, const HeatmapConfig& cfg);

}  // namespace exq
