#include "exq/fusion.hpp"

#include <cmath>

#include "exq/autograd.hpp"
#include "exq/encoders.hpp"
#include "exq/error.hpp"

namespace exq {

FusionVariant parse_fusion_variant(const std::string& s) {
  if (s == "cross_fusion") return FusionVariant::cross_fusion;
  if (s == "summation") return FusionVariant::summation;
  if (s == "concatenation") return FusionVariant::concatenation;
  throw ConfigError("unknown fusion variant '" + s + "'");
}

OutputMode parse_output_mode(const std::string& s) {
  if (s == "concat_conv1d") return OutputMode::concat_conv1d;
  if (s == "concat_only") return OutputMode::concat_only;
  if (s == "rgb_only") return OutputMode::rgb_only;
  if (s == "heatmap_only") return OutputMode::heatmap_only;
  throw ConfigError("unknown output mode '" + s + "'");
}

std::string to_string(FusionVariant v) {
  switch (v) {
    case FusionVariant::cross_fusion: return "cross_fusion";
    case FusionVariant::summation: return "summation";
    case FusionVariant::concatenation: return "concatenation";
  }
  return "?";
}

std::string to_string(OutputMode m) {
  switch (m) {
    case OutputMode::concat_conv1d: return "concat_conv1d";
    case OutputMode::concat_only: return "concat_only";
    case OutputMode::rgb_only: return "rgb_only";
    case OutputMode::heatmap_only: return "heatmap_only";
  }
  return "?";
}

void FusionConfig::validate() const {
  if (dim == 0) throw ConfigError("fusion: D must be positive");
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("fusion: D=" + std::to_string(dim) + " is not divisible by " + std::to_string(heads) + " heads");
  }
  if (variant == FusionVariant::cross_fusion && blocks == 0) throw ConfigError("fusion: need at least one block");
  if (conv_kernel % 2 == 0) throw ConfigError("fusion: conv kernel must be odd, got " + std::to_string(conv_kernel));
  if (variant == FusionVariant::cross_fusion && output_mode == OutputMode::concat_conv1d && dim % 2 != 0) {
    throw ConfigError("fusion: concat_conv1d halves each stream, D must be even");
  }
  if (max_subclips == 0) throw ConfigError("fusion: max_subclips must be positive");
}

LinearLayer::LinearLayer(std::size_t din, std::size_t dout, Rng& rng)
    : weight(fan_in_uniform(din, dout, rng)), bias(Tensor({dout})) {}

Var LinearLayer::operator()(Tape& t, Var x) { return ag::linear(t, x, t.param(weight), t.param(bias)); }

void LinearLayer::append_params(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "weight", &weight});
  out.push_back({prefix + "bias", &bias});
}

LayerNormLayer::LayerNormLayer(std::size_t d) : gain(Tensor({d}, 1.0)), bias(Tensor({d})) {}

Var LayerNormLayer::operator()(Tape& t, Var x) { return ag::layer_norm(t, x, t.param(gain), t.param(bias)); }

void LayerNormLayer::append_params(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "gain", &gain});
  out.push_back({prefix + "bias", &bias});
}

StreamBlock::StreamBlock(std::size_t d, Rng& rng)
    : ln1(d),
      query(d, d, rng),
      key(d, d, rng),
      value(d, d, rng),
      out(d, d, rng),
      ln2(d),
      mlp1(d, d, rng),
      mlp2(d, d, rng) {}

void StreamBlock::append_params(ParamList& list, const std::string& prefix) {
  ln1.append_params(list, prefix + "ln1.");
  query.append_params(list, prefix + "query.");
  key.append_params(list, prefix + "key.");
  value.append_params(list, prefix + "value.");
  out.append_params(list, prefix + "out.");
  ln2.append_params(list, prefix + "ln2.");
  mlp1.append_params(list, prefix + "mlp1.");
  mlp2.append_params(list, prefix + "mlp2.");
}

void CrossFusionBlock::append_params(ParamList& out, const std::string& prefix) {
  rgb.append_params(out, prefix + "rgb.");
  heatmap.append_params(out, prefix + "heatmap.");
}

Var mhca(Tape& t, Var query_in, Var kv_in, StreamBlock& query_side, StreamBlock& kv_side, std::size_t heads,
         std::vector<Tensor>* attention) {
  const Tensor& qv = t.value(query_in);
  const Tensor& kvv = t.value(kv_in);
  if (qv.rank() != 2 || qv.shape() != kvv.shape()) {
    throw ShapeError("mhca: stream shapes " + shape_str(qv.shape()) + " and " + shape_str(kvv.shape()) + " differ");
  }
  const std::size_t d_model = qv.dim(1);
  if (heads == 0 || d_model % heads != 0) throw ShapeError("mhca: width not divisible by head count");
  const std::size_t d = d_model / heads;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  Var q = query_side.query(t, query_in);
  Var k = kv_side.key(t, kv_in);
  Var v = kv_side.value(t, kv_in);
  std::vector<Var> outs;
  outs.reserve(heads);
  if (attention) attention->clear();
  for (std::size_t i = 0; i < heads; ++i) {
    Var qi = ag::slice_lastaxis(t, q, i * d, d);
    Var ki = ag::slice_lastaxis(t, k, i * d, d);
    Var vi = ag::slice_lastaxis(t, v, i * d, d);
    Var scores = ag::scale(t, ag::matmul(t, qi, ag::transpose(t, ki)), inv_sqrt_d);
    Var weights = ag::softmax_lastaxis(t, scores);
    if (attention) attention->push_back(t.value(weights));
    outs.push_back(ag::matmul(t, weights, vi));
  }
  Var cat = heads == 1 ? outs[0] : ag::concat_lastaxis(t, outs);
  return query_side.out(t, cat);
}

namespace {

Var block_mlp(Tape& t, StreamBlock& s, Var x) {
  Var h = ag::relu(t, s.mlp1(t, s.ln2(t, x)));
  return s.mlp2(t, h);
}

}  // namespace

std::pair<Var, Var> cross_fusion_block(Tape& t, Var rgb, Var heatmap, CrossFusionBlock& block, std::size_t heads) {
  Var nv = block.rgb.ln1(t, rgb);
  Var nh = block.heatmap.ln1(t, heatmap);
  Var ev = ag::add(t, mhca(t, nv, nh, block.rgb, block.heatmap, heads), rgb);
  Var eh = ag::add(t, mhca(t, nh, nv, block.heatmap, block.rgb, heads), heatmap);
  Var ov = ag::add(t, block_mlp(t, block.rgb, ev), ev);
  Var oh = ag::add(t, block_mlp(t, block.heatmap, eh), eh);
  return {ov, oh};
}

RegressionHead::RegressionHead(Rng& rng) : l1(kFusedWidth, 256, rng), l2(256, 128, rng), l3(128, 1, rng) {}

void RegressionHead::append_params(ParamList& out, const std::string& prefix) {
  l1.append_params(out, prefix + "l1.");
  l2.append_params(out, prefix + "l2.");
  l3.append_params(out, prefix + "l3.");
}

FusionModel::FusionModel(const FusionConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg.validate();
  const std::size_t d = cfg.dim;
  switch (cfg.variant) {
    case FusionVariant::cross_fusion: {
      Tensor table({cfg.max_subclips, d});
      for (double& x : table.data()) x = rng.uniform(-0.02, 0.02);
      positional = Param(std::move(table));
      for (std::size_t b = 0; b < cfg.blocks; ++b) blocks.emplace_back(d, rng);
      switch (cfg.output_mode) {
        case OutputMode::concat_conv1d: {
          proj_rgb = LinearLayer(d, d / 2, rng);
          proj_heatmap = LinearLayer(d, d / 2, rng);
          const std::size_t fan_in = cfg.conv_kernel * d;
          Tensor k({cfg.conv_kernel, d, kFusedWidth});
          const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
          for (double& x : k.data()) x = rng.uniform(-bound, bound);
          conv_kernel = Param(std::move(k));
          conv_bias = Param(Tensor({kFusedWidth}));
          break;
        }
        case OutputMode::concat_only:
          proj_rgb = LinearLayer(d, kFusedWidth / 2, rng);
          proj_heatmap = LinearLayer(d, kFusedWidth / 2, rng);
          break;
        case OutputMode::rgb_only:
          proj_rgb = LinearLayer(d, kFusedWidth, rng);
          break;
        case OutputMode::heatmap_only:
          proj_heatmap = LinearLayer(d, kFusedWidth, rng);
          break;
      }
      break;
    }
    case FusionVariant::summation:
      fuse = LinearLayer(d, kFusedWidth, rng);
      break;
    case FusionVariant::concatenation:
      fuse = LinearLayer(2 * d, kFusedWidth, rng);
      break;
  }
  head = RegressionHead(rng);
}

Var FusionModel::add_positional(Tape& t, Var rgb_features) {
  const Tensor& f = t.value(rgb_features);
  if (f.rank() != 2 || f.dim(1) != cfg_.dim) throw ShapeError("add_positional: features " + shape_str(f.shape()));
  const std::size_t n = f.dim(0);
  if (n > cfg_.max_subclips) {
    throw ShapeError("add_positional: " + std::to_string(n) + " subclips exceed the table size " +
                     std::to_string(cfg_.max_subclips));
  }
  return ag::add(t, rgb_features, ag::slice_rows(t, t.param(positional), 0, n));
}

Var FusionModel::decode(Tape& t, Var rgb_features, Var heatmap_features) {
  const Tensor& fv = t.value(rgb_features);
  const Tensor& fh = t.value(heatmap_features);
  if (fv.rank() != 2 || fv.shape() != fh.shape() || fv.dim(1) != cfg_.dim) {
    throw ShapeError("decode: stream features " + shape_str(fv.shape()) + " and " + shape_str(fh.shape()) +
                     " for D=" + std::to_string(cfg_.dim));
  }
  switch (cfg_.variant) {
    case FusionVariant::summation: {
      Var s = ag::mean_rows(t, ag::add(t, rgb_features, heatmap_features));
      return fuse(t, s);
    }
    case FusionVariant::concatenation: {
      Var cat = ag::concat_lastaxis(t, rgb_features, heatmap_features);
      return ag::mean_rows(t, fuse(t, cat));
    }
    case FusionVariant::cross_fusion:
      break;
  }
  Var ev = add_positional(t, rgb_features);
  Var eh = heatmap_features;
  for (auto& block : blocks) std::tie(ev, eh) = cross_fusion_block(t, ev, eh, block, cfg_.heads);
  switch (cfg_.output_mode) {
    case OutputMode::concat_conv1d: {
      Var cat = ag::concat_lastaxis(t, proj_rgb(t, ev), proj_heatmap(t, eh));
      Var conv = ag::conv1d_temporal(t, cat, t.param(conv_kernel), t.param(conv_bias));
      return ag::mean_rows(t, conv);
    }
    case OutputMode::concat_only:
      return ag::mean_rows(t, ag::concat_lastaxis(t, proj_rgb(t, ev), proj_heatmap(t, eh)));
    case OutputMode::rgb_only:
      return ag::mean_rows(t, proj_rgb(t, ev));
    case OutputMode::heatmap_only:
      return ag::mean_rows(t, proj_heatmap(t, eh));
  }
  throw ConfigError("decode: unhandled output mode");
}

Var FusionModel::predict(Tape& t, Var fused) {
  const Tensor& e = t.value(fused);
  if (e.size() != kFusedWidth) throw ShapeError("predict: fused vector " + shape_str(e.shape()) + ", expected 512");
  Var x = ag::reshape(t, fused, {1, kFusedWidth});
  x = ag::relu(t, head.l1(t, x));
  x = ag::relu(t, head.l2(t, x));
  return ag::reshape(t, head.l3(t, x), {1});
}

void FusionModel::append_params(ParamList& out, const std::string& prefix) {
  switch (cfg_.variant) {
    case FusionVariant::cross_fusion:
      out.push_back({prefix + "positional", &positional});
      for (std::size_t b = 0; b < blocks.size(); ++b) blocks[b].append_params(out, prefix + "blocks." + std::to_string(b) + ".");
      if (cfg_.output_mode != OutputMode::heatmap_only) proj_rgb.append_params(out, prefix + "proj_rgb.");
      if (cfg_.output_mode != OutputMode::rgb_only) proj_heatmap.append_params(out, prefix + "proj_heatmap.");
      if (cfg_.output_mode == OutputMode::concat_conv1d) {
        out.push_back({prefix + "conv.kernel", &conv_kernel});
        out.push_back({prefix + "conv.bias", &conv_bias});
      }
      break;
    case FusionVariant::summation:
    case FusionVariant::concatenation:
      fuse.append_params(out, prefix + "fuse.");
      break;
  }
  head.append_params(out, prefix + "head.");
}

}  // namespace exq
