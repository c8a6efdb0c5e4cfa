#include "exq/video.hpp"

#include "binio.hpp"
#include "exq/error.hpp"
#include "exq/feature_io.hpp"

namespace exq {

namespace {
constexpr std::string_view kMagic = "EXQV";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string encode_video(const Video& v) {
  std::string out;
  out.reserve(20 + v.data.size());
  binio::put_bytes(out, kMagic);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(v.frames));
  binio::put_u32(out, static_cast<std::uint32_t>(v.height));
  binio::put_u32(out, static_cast<std::uint32_t>(v.width));
  out.append(reinterpret_cast<const char*>(v.data.data()), v.data.size());
  return out;
}

Video decode_video(std::string_view bytes, const std::string& source) {
  binio::Reader r(bytes, source);
  if (r.bytes(4, "magic") != kMagic) throw FormatError(source + ": bad magic at byte 0 (expected EXQV)");
  if (const auto ver = r.u32("version"); ver != kVersion) {
    throw FormatError(source + ": unsupported video version " + std::to_string(ver));
  }
  const auto t = r.u32("frame count");
  const auto h = r.u32("height");
  const auto w = r.u32("width");
  Video v(t, h, w);
  if (r.remaining() != v.data.size()) {
    throw FormatError(source + ": payload length mismatch at byte " + std::to_string(r.offset()) + ": expected " +
                      std::to_string(v.data.size()) + " bytes, found " + std::to_string(r.remaining()));
  }
  const auto payload = r.bytes(v.data.size(), "payload");
  std::copy(payload.begin(), payload.end(), reinterpret_cast<char*>(v.data.data()));
  return v;
}

void save_video(const std::filesystem::path& path, const Video& v) { write_file(path, encode_video(v)); }

Video load_video(const std::filesystem::path& path) { return decode_video(read_file(path), path.string()); }

Tensor video_clip(const Video& v, std::span<const std::size_t> indices, std::size_t top, std::size_t left,
                  std::size_t h, std::size_t w) {
  if (top + h > v.height || left + w > v.width) {
    throw ShapeError("video_clip: crop " + std::to_string(h) + "x" + std::to_string(w) + " at (" + std::to_string(top) +
                     "," + std::to_string(left) + ") exceeds " + std::to_string(v.height) + "x" + std::to_string(v.width));
  }
  Tensor out({indices.size(), 3, h, w});
  double* o = out.data().data();
  for (std::size_t f : indices) {
    if (f >= v.frames) throw ShapeError("video_clip: frame " + std::to_string(f) + " of " + std::to_string(v.frames));
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) *o++ = static_cast<double>(v.at(f, c, top + y, left + x)) / 255.0;
  }
  return out;
}

}  // namespace exq
