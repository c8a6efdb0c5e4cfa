#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exq/optim.hpp"
#include "exq/tensor.hpp"

namespace exq {

/// Self-describing parameter snapshot.
///
/// Layout: "EXQC" | u32 version (1) | u64 config length | config text |
/// u64 tensor count | per tensor: u32 name length, name, u32 rank,
/// u64 extent × rank, f64 × numel. Little-endian throughout.
struct Checkpoint {
  std::string config;
  std::vector<std::pair<std::string, Tensor>> tensors;
  bool operator==(const Checkpoint&) const = default;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes, const std::string& source = "<memory>");
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Appends the values of `params` (in order) to `ckpt`.
void capture_params(Checkpoint& ckpt, const ParamList& params);
/// Copies tensors named in `params` from `ckpt`; every name must be present
/// with a matching shape.
void restore_params(const Checkpoint& ckpt, const ParamList& params);

}  // namespace exq
