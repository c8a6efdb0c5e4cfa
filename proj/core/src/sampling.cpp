#include "exq/sampling.hpp"

#include <string>

#include "exq/error.hpp"

namespace exq {

std::vector<std::size_t> clip_indices(std::size_t video_len, std::size_t frames, std::size_t start) {
  if (video_len == 0) throw ConfigError("clip sampling: empty video");
  std::vector<std::size_t> idx(frames);
  for (std::size_t k = 0; k < frames; ++k) idx[k] = (start + k) % video_len;
  return idx;
}

std::vector<std::size_t> sample_clip(std::size_t video_len, std::size_t frames, Rng& rng) {
  if (video_len == 0) throw ConfigError("clip sampling: empty video");
  return clip_indices(video_len, frames, static_cast<std::size_t>(rng.below(video_len)));
}

std::vector<std::size_t> sample_uniform(std::size_t video_len, std::size_t frames) {
  if (video_len == 0) throw ConfigError("uniform sampling: empty video");
  std::vector<std::size_t> idx(frames);
  for (std::size_t k = 0; k < frames; ++k) idx[k] = k * video_len / frames;
  return idx;
}

SubclipPartition partition(std::size_t frames) {
  if (frames == 0 || frames % kSubclipFrames != 0) {
    throw ConfigError("partition: " + std::to_string(frames) + " frames is not a positive multiple of " +
                      std::to_string(kSubclipFrames));
  }
  SubclipPartition p;
  p.n = frames / kSubclipFrames;
  for (std::size_t k = 0; k < p.n; ++k) p.spans.emplace_back(k * kSubclipFrames, (k + 1) * kSubclipFrames);
  return p;
}

}  // namespace exq
