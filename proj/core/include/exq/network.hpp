#pragma once

#include <cstdint>

#include "exq/encoders.hpp"
#include "exq/fusion.hpp"
#include "exq/heatmap.hpp"

namespace exq {

struct NetworkConfig {
  EncoderConfig rgb{32, 32, 8, 512};
  EncoderConfig heatmap{16, 16, 8, 512};
  FusionConfig fusion;
  HeatmapConfig heatmap_volume;

  void validate() const;
};

/// Both encoders, the fusion decoder and the regression head. Holds the
/// Params that Tape nodes point into, so it is neither copyable nor movable.
class Network {
 public:
  Network(const NetworkConfig& cfg, Rng& rng);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  /// rgb: [T×3×h×w], heatmap volume: [T×3×h'×w'] -> [1] prediction.
  Var forward(Tape& t, const Tensor& rgb_clip, const Tensor& heatmap_volume);

  const NetworkConfig& config() const { return cfg_; }
  ParamList params(const std::string& prefix = "");

  ToyEncoder rgb_encoder;
  ToyEncoder heatmap_encoder;
  FusionModel fusion;

 private:
  NetworkConfig cfg_;
};

}  // namespace exq
