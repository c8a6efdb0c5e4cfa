#include "exq/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "exq/error.hpp"

namespace exq {

GaussianKernel::GaussianKernel(double sigma, std::size_t size) : sigma_(sigma), size_(size), weights_({size, size}) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("gaussian kernel: sigma must be positive");
  if (size % 2 == 0) throw ConfigError("gaussian kernel: size must be odd, got " + std::to_string(size));
  const double c = static_cast<double>(size - 1) / 2.0;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) {
      const double di = static_cast<double>(i) - c, dj = static_cast<double>(j) - c;
      weights_.at(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
    }
}

GaussianKernel build_kernel(double sigma, std::size_t size) { return GaussianKernel(sigma, size); }

long landmark_row(const Point& p) { return static_cast<long>(std::floor(p.y + 0.5)); }
long landmark_col(const Point& p) { return static_cast<long>(std::floor(p.x + 0.5)); }

namespace {

bool far_outside(const Point& p, std::size_t h, std::size_t w, std::size_t r) {
  const double margin = static_cast<double>(r) + 1.0;
  return !(p.x > -margin && p.y > -margin && p.x < static_cast<double>(w) + margin &&
           p.y < static_cast<double>(h) + margin);
}

}  // namespace

Tensor accumulate(std::span<const Point> points, const GaussianKernel& kernel, std::size_t h, std::size_t w) {
  Tensor acc({h, w});
  const auto r = static_cast<long>(kernel.radius());
  const auto hl = static_cast<long>(h), wl = static_cast<long>(w);
  double* out = acc.data().data();
  const double* k = kernel.weights().data().data();
  for (const Point& p : points) {
    if (far_outside(p, h, w, kernel.radius())) continue;
    const long cy = landmark_row(p), cx = landmark_col(p);
    const long y0 = std::max(-r, -cy), y1 = std::min(r, hl - 1 - cy);
    const long x0 = std::max(-r, -cx), x1 = std::min(r, wl - 1 - cx);
    for (long dy = y0; dy <= y1; ++dy) {
      double* row = out + (cy + dy) * wl + cx;
      const double* krow = k + (dy + r) * (2 * r + 1) + r;
      for (long dx = x0; dx <= x1; ++dx) row[dx] += krow[dx];
    }
  }
  return acc;
}

Tensor box_smooth3(const Tensor& grid) {
  if (grid.rank() != 2) throw ShapeError("box_smooth3: expected an H×W grid, got " + shape_str(grid.shape()));
  const auto h = static_cast<long>(grid.dim(0)), w = static_cast<long>(grid.dim(1));
  Tensor out(grid.shape());
  auto clampi = [](long v, long hi) { return std::clamp(v, 0L, hi - 1); };
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      double s = 0.0;
      for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx)
          s += grid.at(static_cast<std::size_t>(clampi(y + dy, h)), static_cast<std::size_t>(clampi(x + dx, w)));
      out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = s / 9.0;
    }
  return out;
}

Tensor min_max_normalize(const Tensor& grid) {
  Tensor out(grid.shape());
  if (grid.empty()) return out;
  const auto [mn, mx] = std::minmax_element(grid.data().begin(), grid.data().end());
  const double lo = *mn, hi = *mx;
  if (!(hi > lo)) return out;
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = (grid[i] - lo) / (hi - lo);
  return out;
}

Tensor smooth_and_normalize(const Tensor& acc) { return min_max_normalize(box_smooth3(acc)); }

Tensor weight_rgb(const Tensor& weights, const Tensor& rgb) {
  if (weights.rank() != 2 || rgb.rank() != 3 || rgb.dim(1) != weights.dim(0) || rgb.dim(2) != weights.dim(1)) {
    throw ShapeError("weight_rgb: weights " + shape_str(weights.shape()) + " vs frame " + shape_str(rgb.shape()));
  }
  Tensor out = rgb;
  const std::size_t plane = weights.size();
  for (std::size_t c = 0; c < rgb.dim(0); ++c)
    for (std::size_t i = 0; i < plane; ++i) out[c * plane + i] *= weights[i];
  return out;
}

namespace {

struct Tap {
  std::size_t i0, i1;
  double frac;
};

std::vector<Tap> bilinear_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t d = 0; d < out; ++d) {
    double src = (static_cast<double>(d) + 0.5) * ratio - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto i0 = static_cast<std::size_t>(std::floor(src));
    const std::size_t i1 = std::min(i0 + 1, in - 1);
    taps[d] = {i0, i1, src - static_cast<double>(i0)};
  }
  return taps;
}

}  // namespace

Tensor resize_bilinear(const Tensor& planes, std::size_t out_h, std::size_t out_w) {
  if (planes.rank() != 3) throw ShapeError("resize_bilinear: expected C×H×W, got " + shape_str(planes.shape()));
  const std::size_t c = planes.dim(0), h = planes.dim(1), w = planes.dim(2);
  if (h == 0 || w == 0 || out_h == 0 || out_w == 0) throw ShapeError("resize_bilinear: empty extent");
  if (h == out_h && w == out_w) return planes;
  const auto ty = bilinear_taps(h, out_h);
  const auto tx = bilinear_taps(w, out_w);
  Tensor out({c, out_h, out_w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* p = planes.data().data() + ch * h * w;
    double* o = out.data().data() + ch * out_h * out_w;
    for (std::size_t y = 0; y < out_h; ++y) {
      const Tap& a = ty[y];
      for (std::size_t x = 0; x < out_w; ++x) {
        const Tap& b = tx[x];
        const double top = p[a.i0 * w + b.i0] * (1.0 - b.frac) + p[a.i0 * w + b.i1] * b.frac;
        const double bot = p[a.i1 * w + b.i0] * (1.0 - b.frac) + p[a.i1 * w + b.i1] * b.frac;
        o[y * out_w + x] = top * (1.0 - a.frac) + bot * a.frac;
      }
    }
  }
  return out;
}

Tensor position_mask(std::span<const Point> points, std::size_t h, std::size_t w) {
  Tensor m({h, w});
  for (const Point& p : points) {
    if (far_outside(p, h, w, 0)) continue;
    const long y = landmark_row(p), x = landmark_col(p);
    if (y >= 0 && x >= 0 && y < static_cast<long>(h) && x < static_cast<long>(w)) {
      m.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = 1.0;
    }
  }
  return m;
}

HeatmapMode parse_heatmap_mode(const std::string& s) {
  if (s == "gaussian") return HeatmapMode::gaussian;
  if (s == "positions_only") return HeatmapMode::positions_only;
  throw ConfigError("unknown heatmap mode '" + s + "'");
}

std::string to_string(HeatmapMode m) { return m == HeatmapMode::gaussian ? "gaussian" : "positions_only"; }

Tensor frame_weights(std::span<const Point> points, const HeatmapConfig& cfg, std::size_t h, std::size_t w) {
  if (cfg.mode == HeatmapMode::positions_only) return position_mask(points, h, w);
  const GaussianKernel kernel(cfg.sigma, cfg.kernel_size);
  Tensor acc = accumulate(points, kernel, h, w);
  return cfg.smoothing ? smooth_and_normalize(acc) : min_max_normalize(acc);
}

HeatmapVolume build_volume(const LandmarkSequence& seq, const Tensor& frames, const HeatmapConfig& cfg) {
  if (frames.rank() != 4 || frames.dim(1) != 3) {
    throw ShapeError("build_volume: frames must be T×3×H×W, got " + shape_str(frames.shape()));
  }
  const std::size_t t = frames.dim(0), h = frames.dim(2), w = frames.dim(3);
  if (seq.frames.size() != t) {
    throw ShapeError("build_volume: " + std::to_string(seq.frames.size()) + " landmark frames for " + std::to_string(t) +
                     " RGB frames");
  }
  if (seq.height != h || seq.width != w) {
    throw ShapeError("build_volume: landmark frame extents " + std::to_string(seq.width) + "x" +
                     std::to_string(seq.height) + " differ from RGB " + std::to_string(w) + "x" + std::to_string(h));
  }
  const GaussianKernel kernel(cfg.sigma, cfg.kernel_size);
  const std::size_t in_plane = 3 * h * w, out_plane = 3 * cfg.out_height * cfg.out_width;
  HeatmapVolume vol{Tensor({t, 3, cfg.out_height, cfg.out_width}), cfg.mode};
  for (std::size_t f = 0; f < t; ++f) {
    const auto& pts = seq.frames[f].points;
    Tensor weights;
    if (cfg.mode == HeatmapMode::positions_only) {
      weights = position_mask(pts, h, w);
    } else {
      Tensor acc = accumulate(pts, kernel, h, w);
      weights = cfg.smoothing ? smooth_and_normalize(acc) : min_max_normalize(acc);
    }
    Tensor rgb({3, h, w}, std::vector<double>(frames.data().begin() + static_cast<std::ptrdiff_t>(f * in_plane),
                                               frames.data().begin() + static_cast<std::ptrdiff_t>((f + 1) * in_plane)));
    Tensor frame = resize_bilinear(weight_rgb(weights, rgb), cfg.out_height, cfg.out_width);
    std::copy(frame.data().begin(), frame.data().end(), vol.data.data().begin() + static_cast<std::ptrdiff_t>(f * out_plane));
  }
  return vol;
}

}  // namespace exq
