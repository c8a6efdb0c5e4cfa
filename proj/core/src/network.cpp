#include "exq/network.hpp"

#include "exq/error.hpp"

namespace exq {

void NetworkConfig::validate() const {
  fusion.validate();
  if (rgb.dim != fusion.dim || heatmap.dim != fusion.dim) {
    throw ConfigError("encoder widths (" + std::to_string(rgb.dim) + ", " + std::to_string(heatmap.dim) +
                      ") must equal the fusion width " + std::to_string(fusion.dim));
  }
  if (heatmap_volume.out_height != heatmap.height || heatmap_volume.out_width != heatmap.width) {
    throw ConfigError("heatmap volume size must match the heatmap encoder input");
  }
}

namespace {
const NetworkConfig& checked(const NetworkConfig& cfg) {
  cfg.validate();
  return cfg;
}
}  // namespace

Network::Network(const NetworkConfig& cfg, Rng& rng)
    : rgb_encoder(Stream::rgb, checked(cfg).rgb, rng),
      heatmap_encoder(Stream::heatmap, cfg.heatmap, rng),
      fusion(cfg.fusion, rng),
      cfg_(cfg) {}

Var Network::forward(Tape& t, const Tensor& rgb_clip, const Tensor& heatmap_volume) {
  Var fv = rgb_encoder.encode(t, rgb_clip);
  Var fh = heatmap_encoder.encode(t, heatmap_volume);
  return fusion.predict(t, fusion.decode(t, fv, fh));
}

ParamList Network::params(const std::string& prefix) {
  ParamList out;
  rgb_encoder.append_params(out, prefix + "rgb_encoder.");
  heatmap_encoder.append_params(out, prefix + "heatmap_encoder.");
  fusion.append_params(out, prefix + "fusion.");
  return out;
}

}  // namespace exq
