#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "exq/tensor.hpp"

namespace exq {

/// 8-bit planar RGB frames, [T × 3 × H × W].
struct Video {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;

  Video() = default;
  Video(std::size_t t, std::size_t h, std::size_t w) : frames(t), height(h), width(w), data(t * 3 * h * w) {}

  std::uint8_t& at(std::size_t f, std::size_t c, std::size_t y, std::size_t x) {
    return data[((f * 3 + c) * height + y) * width + x];
  }
  std::uint8_t at(std::size_t f, std::size_t c, std::size_t y, std::size_t x) const {
    return data[((f * 3 + c) * height + y) * width + x];
  }
  bool operator==(const Video&) const = default;
};

// Layout: "EXQV" | u32 version (1) | u32 T | u32 H | u32 W | T·3·H·W bytes.
std::string encode_video(const Video& v);
Video decode_video(std::string_view bytes, const std::string& source = "<memory>");
void save_video(const std::filesystem::path& path, const Video& v);
Video load_video(const std::filesystem::path& path);

/// Selected frames, cropped to [top, top+h) × [left, left+w) and scaled to
/// [0, 1]: [indices.size() × 3 × h × w].
Tensor video_clip(const Video& v, std::span<const std::size_t> indices, std::size_t top, std::size_t left,
                  std::size_t h, std::size_t w);

}  // namespace exq
