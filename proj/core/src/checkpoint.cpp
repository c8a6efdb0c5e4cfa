#include "exq/checkpoint.hpp"

#include <unordered_map>

#include "binio.hpp"
#include "exq/error.hpp"
#include "exq/feature_io.hpp"

namespace exq {

namespace {
constexpr std::string_view kMagic = "EXQC";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out;
  binio::put_bytes(out, kMagic);
  binio::put_u32(out, kVersion);
  binio::put_u64(out, ckpt.config.size());
  binio::put_bytes(out, ckpt.config);
  binio::put_u64(out, ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    binio::put_u32(out, static_cast<std::uint32_t>(name.size()));
    binio::put_bytes(out, name);
    binio::put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape()) binio::put_u64(out, e);
    for (double v : t.data()) binio::put_f64(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes, const std::string& source) {
  binio::Reader r(bytes, source);
  if (r.bytes(4, "magic") != kMagic) throw FormatError(source + ": bad magic at byte 0 (expected EXQC)");
  if (const auto v = r.u32("version"); v != kVersion) {
    throw FormatError(source + ": unsupported checkpoint version " + std::to_string(v));
  }
  Checkpoint ckpt;
  const auto config_len = r.u64("config length");
  ckpt.config = std::string(r.bytes(config_len, "config"));
  const auto count = r.u64("tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = r.u32("tensor name length");
    std::string name(r.bytes(name_len, "tensor name"));
    const auto rank = r.u32("tensor rank");
    if (rank > 8) r.fail("implausible rank " + std::to_string(rank) + " for tensor '" + name + "'");
    Shape shape(rank);
    for (auto& e : shape) e = r.u64("tensor extent");
    const std::size_t numel = shape_numel(shape);
    if (r.remaining() / 8 < numel) r.fail("tensor '" + name + "' payload truncated");
    Tensor t(shape);
    for (double& v : t.data()) v = r.f64("tensor payload");
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (r.remaining() != 0) r.fail(std::to_string(r.remaining()) + " trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path), path.string());
}

void capture_params(Checkpoint& ckpt, const ParamList& params) {
  for (const auto& p : params) ckpt.tensors.emplace_back(p.name, p.param->value);
}

void restore_params(const Checkpoint& ckpt, const ParamList& params) {
  std::unordered_map<std::string, const Tensor*> index;
  for (const auto& [name, t] : ckpt.tensors) index.emplace(name, &t);
  for (const auto& p : params) {
    auto it = index.find(p.name);
    if (it == index.end()) throw FormatError("checkpoint has no tensor '" + p.name + "'");
    if (it->second->shape() != p.param->shape()) {
      throw FormatError("checkpoint tensor '" + p.name + "' has shape " + shape_str(it->second->shape()) +
                        ", model expects " + shape_str(p.param->shape()));
    }
    p.param->value = *it->second;
  }
}

}  // namespace exq
