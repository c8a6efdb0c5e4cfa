#pragma once

// JSON mappings for configuration structs. Internal to the library so the
// public headers stay free of the JSON dependency.

#include <string>
#include <vector>

#include "exq/network.hpp"
#include "json.hpp"

namespace exq {

using nlohmann::json;

void to_json(json& j, const EncoderConfig& c);
void from_json(const json& j, EncoderConfig& c);
void to_json(json& j, const FusionConfig& c);
void from_json(const json& j, FusionConfig& c);
void to_json(json& j, const HeatmapConfig& c);
void from_json(const json& j, HeatmapConfig& c);
void to_json(json& j, const NetworkConfig& c);
void from_json(const json& j, NetworkConfig& c);

/// Leaf-level differences between two documents, as "path: a != b" lines.
std::vector<std::string> json_diff(const json& a, const json& b, const std::string& path = "");

/// Parses text, rethrowing parse/type errors as FormatError tagged with `source`.
json parse_json(const std::string& text, const std::string& source);

}  // namespace exq
