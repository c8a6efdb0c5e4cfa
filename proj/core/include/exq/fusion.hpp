#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "exq/optim.hpp"
#include "exq/rng.hpp"
#include "exq/tape.hpp"

namespace exq {

enum class FusionVariant { cross_fusion, summation, concatenation };
enum class OutputMode { concat_conv1d, concat_only, rgb_only, heatmap_only };

FusionVariant parse_fusion_variant(const std::string& s);
OutputMode parse_output_mode(const std::string& s);
std::string to_string(FusionVariant v);
std::string to_string(OutputMode m);

/// Width of the fused vector handed to the regression head.
inline constexpr std::size_t kFusedWidth = 512;

struct FusionConfig {
  FusionVariant variant = FusionVariant::cross_fusion;
  std::size_t blocks = 3;  ///< cross-fusion block count
  std::size_t heads = 8;
  std::size_t dim = 512;  ///< per-subclip feature width D
  OutputMode output_mode = OutputMode::concat_conv1d;
  std::size_t conv_kernel = 3;
  std::size_t max_subclips = 16;

  std::size_t head_dim() const { return dim / heads; }
  /// Throws ConfigError on an inconsistent combination.
  void validate() const;
  bool operator==(const FusionConfig&) const = default;
};

struct LinearLayer {
  Param weight, bias;
  LinearLayer() = default;
  LinearLayer(std::size_t din, std::size_t dout, Rng& rng);
  Var operator()(Tape& t, Var x);
  void append_params(ParamList& out, const std::string& prefix);
};

struct LayerNormLayer {
  Param gain, bias;
  LayerNormLayer() = default;
  explicit LayerNormLayer(std::size_t d);
  Var operator()(Tape& t, Var x);
  void append_params(ParamList& out, const std::string& prefix);
};

/// One stream's half of a cross-fusion block.
struct StreamBlock {
  LayerNormLayer ln1;
  LinearLayer query, key, value, out;
  LayerNormLayer ln2;
  LinearLayer mlp1, mlp2;

  StreamBlock() = default;
  StreamBlock(std::size_t d, Rng& rng);
  void append_params(ParamList& out, const std::string& prefix);
};

struct CrossFusionBlock {
  StreamBlock rgb, heatmap;

  CrossFusionBlock() = default;
  CrossFusionBlock(std::size_t d, Rng& rng) : rgb(d, rng), heatmap(d, rng) {}
  void append_params(ParamList& out, const std::string& prefix);
};

/// Multi-head cross-attention. Queries come from `query_in` through the
/// query side's projection; keys and values come from `kv_in` through the
/// other side's projections. Per head i:
///   softmax(Q_i K_i^T / sqrt(d)) V_i, heads concatenated, then projected by
/// the query side's output layer. Inputs are expected already normalised.
/// When `attention` is non-null it receives the per-head [n×n] weights.
Var mhca(Tape& t, Var query_in, Var kv_in, StreamBlock& query_side, StreamBlock& kv_side, std::size_t heads,
         std::vector<Tensor>* attention = nullptr);

/// Pre-norm block with residual paths around attention and MLP. Both
/// streams read the block's inputs, so their updates are independent.
std::pair<Var, Var> cross_fusion_block(Tape& t, Var rgb, Var heatmap, CrossFusionBlock& block, std::size_t heads);

/// 512 -> 256 -> 128 -> 1 with ReLU between layers.
struct RegressionHead {
  LinearLayer l1, l2, l3;

  RegressionHead() = default;
  explicit RegressionHead(Rng& rng);
  void append_params(ParamList& out, const std::string& prefix);
};

class FusionModel {
 public:
  FusionModel(const FusionConfig& cfg, Rng& rng);

  const FusionConfig& config() const { return cfg_; }

  /// [n×D] + first n rows of the learnable subclip position table.
  Var add_positional(Tape& t, Var rgb_features);
  /// Fuses two [n×D] sequences into one [512] vector.
  Var decode(Tape& t, Var rgb_features, Var heatmap_features);
  /// Regression head; returns a [1] node.
  Var predict(Tape& t, Var fused);

  void append_params(ParamList& out, const std::string& prefix);

  Param positional;  ///< [max_subclips × D]; cross_fusion only
  std::vector<CrossFusionBlock> blocks;
  LinearLayer proj_rgb, proj_heatmap;  ///< per-stream output projections
  Param conv_kernel, conv_bias;        ///< concat_conv1d only
  LinearLayer fuse;                    ///< summation / concatenation baselines
  RegressionHead head;

 private:
  FusionConfig cfg_;
};

}  // namespace exq
