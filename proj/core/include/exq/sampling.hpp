#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "exq/rng.hpp"

namespace exq {

inline constexpr std::size_t kSubclipFrames = 16;

/// T consecutive frame indices starting at `start`, wrapping to the
/// beginning of the video when it runs out.
std::vector<std::size_t> clip_indices(std::size_t video_len, std::size_t frames, std::size_t start);

/// clip_indices with a start drawn uniformly from [0, video_len).
std::vector<std::size_t> sample_clip(std::size_t video_len, std::size_t frames, Rng& rng);

/// floor(k * video_len / frames) for k in [0, frames).
std::vector<std::size_t> sample_uniform(std::size_t video_len, std::size_t frames);

struct SubclipPartition {
  std::size_t n = 0;
  std::size_t t = kSubclipFrames;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  ///< half-open [begin, end)
};

/// Splits T frames into T/16 contiguous 16-frame subclips.
SubclipPartition partition(std::size_t frames);

}  // namespace exq
