#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "exq/optim.hpp"
#include "exq/rng.hpp"
#include "exq/tape.hpp"

namespace exq {

enum class Stream : std::uint32_t { rgb = 0, heatmap = 1 };
std::string to_string(Stream s);

struct EncoderConfig {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t grid = 8;   ///< spatial patch grid per side
  std::size_t dim = 512;  ///< feature width D
  bool operator==(const EncoderConfig&) const = default;
};

/// Small trainable stand-in for a video backbone.
///
/// Per frame: average-pool onto a grid×grid patch grid and project linearly
/// to D. Projections are averaged over the 16 frames of each subclip and fed
/// through a D -> D -> D ReLU MLP. The projection is applied after the
/// temporal mean.
class ToyEncoder {
 public:
  ToyEncoder(Stream stream, const EncoderConfig& cfg, Rng& rng);

  /// clip: [n·16 × 3 × h × w] -> [n × D]
  Var encode(Tape& t, const Tensor& clip);
  /// subclip: [16 × 3 × h × w] -> [D]
  Var encode_subclip(Tape& t, const Tensor& subclip);

  Stream stream() const { return stream_; }
  const EncoderConfig& config() const { return cfg_; }
  void append_params(ParamList& out, const std::string& prefix);

  Param proj_w, proj_b;
  Param fc1_w, fc1_b;
  Param fc2_w, fc2_b;

 private:
  Stream stream_;
  EncoderConfig cfg_;
};

/// Fan-in scaled uniform matrix U(-1/sqrt(rows), 1/sqrt(rows)).
Tensor fan_in_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace exq
