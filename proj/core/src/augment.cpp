#include "exq/augment.hpp"

#include "exq/error.hpp"

namespace exq {

ClipSample crop_clip(const ClipSample& clip, const CropWindow& win) {
  const Tensor& f = clip.frames;
  if (f.rank() != 4) throw ShapeError("crop_clip: frames must be T×C×H×W, got " + shape_str(f.shape()));
  const std::size_t t = f.dim(0), c = f.dim(1), h = f.dim(2), w = f.dim(3);
  if (win.top + win.height > h || win.left + win.width > w) {
    throw ShapeError("crop_clip: window exceeds " + std::to_string(h) + "x" + std::to_string(w));
  }
  ClipSample out;
  out.frames = Tensor({t, c, win.height, win.width});
  double* o = out.frames.data().data();
  for (std::size_t fi = 0; fi < t; ++fi)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < win.height; ++y) {
        const double* row = f.data().data() + ((fi * c + ch) * h + win.top + y) * w + win.left;
        for (std::size_t x = 0; x < win.width; ++x) *o++ = row[x];
      }
  out.landmarks = clip.landmarks;
  const auto dx = static_cast<double>(win.left), dy = static_cast<double>(win.top);
  for (auto& frame : out.landmarks)
    for (auto& p : frame) {
      p.x -= dx;
      p.y -= dy;
    }
  return out;
}

ClipSample flip_clip(const ClipSample& clip, std::span<const int> mirror) {
  validate_mirror_map(mirror);
  const Tensor& f = clip.frames;
  if (f.rank() != 4) throw ShapeError("flip_clip: frames must be T×C×H×W, got " + shape_str(f.shape()));
  const std::size_t w = f.dim(3);
  ClipSample out;
  out.frames = Tensor(f.shape());
  const std::size_t rows = f.size() / w;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t x = 0; x < w; ++x) out.frames[r * w + x] = f[r * w + (w - 1 - x)];
  const double axis = static_cast<double>(w) - 1.0;
  out.landmarks.resize(clip.landmarks.size());
  for (std::size_t fi = 0; fi < clip.landmarks.size(); ++fi) {
    const auto& src = clip.landmarks[fi];
    if (src.size() != mirror.size()) {
      throw ConfigError("flip_clip: mirror map covers " + std::to_string(mirror.size()) + " landmarks, frame has " +
                        std::to_string(src.size()));
    }
    auto& dst = out.landmarks[fi];
    dst.resize(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      const Point& p = src[static_cast<std::size_t>(mirror[i])];
      dst[i] = {axis - p.x, p.y};
    }
  }
  return out;
}

AugmentChoice draw_augment(Rng& rng, std::size_t height, std::size_t width, std::size_t crop_h, std::size_t crop_w) {
  if (crop_h > height || crop_w > width) throw ConfigError("augment: crop larger than frame");
  AugmentChoice c;
  c.crop = {static_cast<std::size_t>(rng.below(height - crop_h + 1)),
            static_cast<std::size_t>(rng.below(width - crop_w + 1)), crop_h, crop_w};
  c.flip = rng.coin();
  return c;
}

AugmentChoice center_choice(std::size_t height, std::size_t width, std::size_t crop_h, std::size_t crop_w) {
  if (crop_h > height || crop_w > width) throw ConfigError("augment: crop larger than frame");
  return AugmentChoice{{(height - crop_h) / 2, (width - crop_w) / 2, crop_h, crop_w}, false};
}

ClipSample apply_augment(const ClipSample& clip, const AugmentChoice& choice, std::span<const int> mirror) {
  ClipSample out = crop_clip(clip, choice.crop);
  return choice.flip ? flip_clip(out, mirror) : out;
}

ClipSample augment(const ClipSample& clip, std::span<const int> mirror, Rng& rng, std::size_t crop_h,
                   std::size_t crop_w) {
  const AugmentChoice c = draw_augment(rng, clip.frames.dim(2), clip.frames.dim(3), crop_h, crop_w);
  return apply_augment(clip, c, mirror);
}

}  // namespace exq
