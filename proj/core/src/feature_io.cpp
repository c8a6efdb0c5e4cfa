#include "exq/feature_io.hpp"

#include <fstream>
#include <sstream>

#include "binio.hpp"
#include "exq/error.hpp"

namespace exq {

namespace {
constexpr std::string_view kMagic = "EXQF";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

std::string encode_features(const FeatureSequence& fs) {
  if (fs.features.rank() != 2) throw ShapeError("feature sequence must be n×D, got " + shape_str(fs.features.shape()));
  std::string out;
  out.reserve(28 + fs.features.size() * 8);
  binio::put_bytes(out, kMagic);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(fs.stream));
  binio::put_u64(out, fs.features.dim(0));
  binio::put_u64(out, fs.features.dim(1));
  for (double v : fs.features.data()) binio::put_f64(out, v);
  return out;
}

FeatureSequence decode_features(std::string_view bytes, const std::string& source) {
  binio::Reader r(bytes, source);
  if (r.bytes(4, "magic") != kMagic) {
    throw FormatError(source + ": bad magic at byte 0 (expected EXQF)");
  }
  if (const auto v = r.u32("version"); v != kVersion) {
    throw FormatError(source + ": unsupported version " + std::to_string(v) + " at byte 4");
  }
  const auto tag = r.u32("stream tag");
  if (tag > 1) throw FormatError(source + ": unknown stream tag " + std::to_string(tag) + " at byte 8");
  const auto n = r.u64("n");
  const auto d = r.u64("D");
  const std::size_t header = r.offset();
  const std::uint64_t expected = n * d * 8;
  if (r.remaining() != expected) {
    throw FormatError(source + ": payload length mismatch at byte " + std::to_string(header) + ": expected " +
                      std::to_string(expected) + " bytes for n=" + std::to_string(n) + ", D=" + std::to_string(d) +
                      ", found " + std::to_string(r.remaining()));
  }
  FeatureSequence fs;
  fs.stream = static_cast<Stream>(tag);
  fs.features = Tensor({n, d});
  for (double& v : fs.features.data()) v = r.f64("payload");
  return fs;
}

void save_features(const std::filesystem::path& path, const FeatureSequence& fs) {
  write_file(path, encode_features(fs));
}

FeatureSequence load_features(const std::filesystem::path& path) {
  return decode_features(read_file(path), path.string());
}

}  // namespace exq
