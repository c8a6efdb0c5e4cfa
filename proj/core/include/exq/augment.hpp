#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "exq/landmarks.hpp"
#include "exq/rng.hpp"
#include "exq/tensor.hpp"

namespace exq {

using PointTrack = std::vector<std::vector<Point>>;  ///< landmarks per frame

/// Frames [T×3×H×W] with the landmarks of each frame, in frame pixels.
struct ClipSample {
  Tensor frames;
  PointTrack landmarks;
  bool operator==(const ClipSample&) const = default;
};

struct CropWindow {
  std::size_t top = 0, left = 0, height = 0, width = 0;
};

struct AugmentChoice {
  CropWindow crop;
  bool flip = false;
};

ClipSample crop_clip(const ClipSample& clip, const CropWindow& window);

/// Mirrors frames left-right, maps x to W-1-x and re-pairs landmark
/// indices through `mirror` (a self-inverse permutation). Applying it twice
/// restores the input exactly whenever W-1-x is exact, e.g. for
/// coordinates on a 1/1024 pixel lattice.
ClipSample flip_clip(const ClipSample& clip, std::span<const int> mirror);

/// Uniform crop offset and a fair coin for the flip.
AugmentChoice draw_augment(Rng& rng, std::size_t height, std::size_t width, std::size_t crop_h, std::size_t crop_w);

/// Centred crop, no flip.
AugmentChoice center_choice(std::size_t height, std::size_t width, std::size_t crop_h, std::size_t crop_w);

ClipSample apply_augment(const ClipSample& clip, const AugmentChoice& choice, std::span<const int> mirror);

ClipSample augment(const ClipSample& clip, std::span<const int> mirror, Rng& rng, std::size_t crop_h,
                   std::size_t crop_w);

}  // namespace exq
