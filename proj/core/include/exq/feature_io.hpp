#pragma once

#include <filesystem>
#include <string>

#include "exq/encoders.hpp"
#include "exq/tensor.hpp"

namespace exq {

/// One feature vector per subclip for a single stream.
struct FeatureSequence {
  Tensor features;  ///< [n × D]
  Stream stream = Stream::rgb;
  bool operator==(const FeatureSequence&) const = default;
};

// Layout: "EXQF" | u32 version (1) | u32 stream tag | u64 n | u64 D |
// n·D f64 values, row-major. All integers and floats little-endian.
std::string encode_features(const FeatureSequence& fs);
FeatureSequence decode_features(std::string_view bytes, const std::string& source = "<memory>");

void save_features(const std::filesystem::path& path, const FeatureSequence& fs);
FeatureSequence load_features(const std::filesystem::path& path);

/// Whole-file helpers shared with the other binary formats.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace exq
