#include "config_json.hpp"

#include <set>

#include "exq/error.hpp"

namespace exq {

void to_json(json& j, const EncoderConfig& c) {
  j = json{{"height", c.height}, {"width", c.width}, {"grid", c.grid}, {"dim", c.dim}};
}

void from_json(const json& j, EncoderConfig& c) {
  c.height = j.value("height", c.height);
  c.width = j.value("width", c.width);
  c.grid = j.value("grid", c.grid);
  c.dim = j.value("dim", c.dim);
}

void to_json(json& j, const FusionConfig& c) {
  j = json{{"variant", to_string(c.variant)},         {"blocks", c.blocks},
           {"heads", c.heads},                        {"dim", c.dim},
           {"output_mode", to_string(c.output_mode)}, {"conv_kernel", c.conv_kernel},
           {"max_subclips", c.max_subclips}};
}

void from_json(const json& j, FusionConfig& c) {
  if (j.contains("variant")) c.variant = parse_fusion_variant(j.at("variant").get<std::string>());
  c.blocks = j.value("blocks", c.blocks);
  c.heads = j.value("heads", c.heads);
  c.dim = j.value("dim", c.dim);
  if (j.contains("output_mode")) c.output_mode = parse_output_mode(j.at("output_mode").get<std::string>());
  c.conv_kernel = j.value("conv_kernel", c.conv_kernel);
  c.max_subclips = j.value("max_subclips", c.max_subclips);
}

void to_json(json& j, const HeatmapConfig& c) {
  j = json{{"sigma", c.sigma},
           {"kernel_size", c.kernel_size},
           {"mode", to_string(c.mode)},
           {"out_height", c.out_height},
           {"out_width", c.out_width},
           {"smoothing", c.smoothing}};
}

void from_json(const json& j, HeatmapConfig& c) {
  c.sigma = j.value("sigma", c.sigma);
  c.kernel_size = j.value("kernel_size", c.kernel_size);
  if (j.contains("mode")) c.mode = parse_heatmap_mode(j.at("mode").get<std::string>());
  c.out_height = j.value("out_height", c.out_height);
  c.out_width = j.value("out_width", c.out_width);
  c.smoothing = j.value("smoothing", c.smoothing);
}

void to_json(json& j, const NetworkConfig& c) {
  j = json{{"rgb_encoder", c.rgb}, {"heatmap_encoder", c.heatmap}, {"fusion", c.fusion}, {"heatmap", c.heatmap_volume}};
}

void from_json(const json& j, NetworkConfig& c) {
  if (j.contains("rgb_encoder")) j.at("rgb_encoder").get_to(c.rgb);
  if (j.contains("heatmap_encoder")) j.at("heatmap_encoder").get_to(c.heatmap);
  if (j.contains("fusion")) j.at("fusion").get_to(c.fusion);
  if (j.contains("heatmap")) j.at("heatmap").get_to(c.heatmap_volume);
}

std::vector<std::string> json_diff(const json& a, const json& b, const std::string& path) {
  std::vector<std::string> out;
  if (a.is_object() && b.is_object()) {
    std::set<std::string> keys;
    for (const auto& [k, _] : a.items()) keys.insert(k);
    for (const auto& [k, _] : b.items()) keys.insert(k);
    for (const auto& k : keys) {
      const std::string sub = path.empty() ? k : path + "." + k;
      if (!a.contains(k)) {
        out.push_back(sub + ": <missing> != " + b.at(k).dump());
      } else if (!b.contains(k)) {
        out.push_back(sub + ": " + a.at(k).dump() + " != <missing>");
      } else {
        auto nested = json_diff(a.at(k), b.at(k), sub);
        out.insert(out.end(), nested.begin(), nested.end());
      }
    }
    return out;
  }
  if (a != b) out.push_back((path.empty() ? "<root>" : path) + ": " + a.dump() + " != " + b.dump());
  return out;
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(source + ": " + e.what());
  }
}

}  // namespace exq
