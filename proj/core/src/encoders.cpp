#include "exq/encoders.hpp"

#include <cmath>

#include "exq/autograd.hpp"
#include "exq/error.hpp"
#include "exq/sampling.hpp"

namespace exq {

std::string to_string(Stream s) { return s == Stream::rgb ? "rgb" : "heatmap"; }

Tensor fan_in_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor w({rows, cols});
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
  return w;
}

ToyEncoder::ToyEncoder(Stream stream, const EncoderConfig& cfg, Rng& rng) : stream_(stream), cfg_(cfg) {
  if (cfg.grid == 0 || cfg.height % cfg.grid != 0 || cfg.width % cfg.grid != 0) {
    throw ConfigError("encoder: " + std::to_string(cfg.height) + "x" + std::to_string(cfg.width) +
                      " input is not divisible by a grid of " + std::to_string(cfg.grid));
  }
  if (cfg.dim == 0) throw ConfigError("encoder: feature width must be positive");
  const std::size_t pooled = 3 * cfg.grid * cfg.grid;
  proj_w = Param(fan_in_uniform(pooled, cfg.dim, rng));
  proj_b = Param(Tensor({cfg.dim}));
  fc1_w = Param(fan_in_uniform(cfg.dim, cfg.dim, rng));
  fc1_b = Param(Tensor({cfg.dim}));
  fc2_w = Param(fan_in_uniform(cfg.dim, cfg.dim, rng));
  fc2_b = Param(Tensor({cfg.dim}));
}

Var ToyEncoder::encode(Tape& t, const Tensor& clip) {
  if (clip.rank() != 4 || clip.dim(1) != 3 || clip.dim(2) != cfg_.height || clip.dim(3) != cfg_.width) {
    throw ShapeError(to_string(stream_) + " encoder expects [T×3×" + std::to_string(cfg_.height) + "×" +
                     std::to_string(cfg_.width) + "], got " + shape_str(clip.shape()));
  }
  partition(clip.dim(0));
  Var frames = t.constant(clip);
  Var pooled = ag::avg_pool_grid(t, frames, cfg_.grid);
  Var per_subclip = ag::group_mean_rows(t, pooled, kSubclipFrames);
  Var h = ag::linear(t, per_subclip, t.param(proj_w), t.param(proj_b));
  h = ag::relu(t, ag::linear(t, h, t.param(fc1_w), t.param(fc1_b)));
  return ag::linear(t, h, t.param(fc2_w), t.param(fc2_b));
}

Var ToyEncoder::encode_subclip(Tape& t, const Tensor& subclip) {
  if (subclip.rank() != 4 || subclip.dim(0) != kSubclipFrames) {
    throw ShapeError("encode_subclip expects 16 frames, got " + shape_str(subclip.shape()));
  }
  return ag::reshape(t, encode(t, subclip), {cfg_.dim});
}

void ToyEncoder::append_params(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "proj.weight", &proj_w});
  out.push_back({prefix + "proj.bias", &proj_b});
  out.push_back({prefix + "fc1.weight", &fc1_w});
  out.push_back({prefix + "fc1.bias", &fc1_b});
  out.push_back({prefix + "fc2.weight", &fc2_w});
  out.push_back({prefix + "fc2.bias", &fc2_b});
}

}  // namespace exq
