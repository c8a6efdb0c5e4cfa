#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "exq/losses.hpp"
#include "exq/network.hpp"

namespace exq {

struct SyntheticSpec;

struct DataConfig {
  std::size_t clip_frames = 80;   ///< frames per sampled clip, a multiple of 16
  std::size_t crop_height = 32;
  std::size_t crop_width = 32;
  bool flip = true;
  bool operator==(const DataConfig&) const = default;
};

struct Schedule {
  int epochs = 20;
  std::size_t batch_size = 4;
  double lr = 0.001;
  int lr_decay_every = 8;
  double lr_decay_factor = 0.1;
  double momentum = 0.9;
  std::size_t aug_multiplier = 5;
  bool operator==(const Schedule&) const = default;
};

struct LossConfig {
  LossKind kind = LossKind::bmc;
  double sigma_noise = 1.0;
  bool operator==(const LossConfig&) const = default;
};

enum class InferenceMode { uniform_once, random_clips };
InferenceMode parse_inference_mode(const std::string& s);
std::string to_string(InferenceMode m);

struct InferenceConfig {
  InferenceMode mode = InferenceMode::uniform_once;
  std::size_t clips = 10;  ///< k for random_clips
  bool operator==(const InferenceConfig&) const = default;
};

/// Everything a training or evaluation run depends on.
struct ExperimentManifest {
  /// Dataset index (dataset.json or its directory), relative paths resolved
  /// against `base_dir`. Ignored when `synthetic` is set.
  std::string dataset;
  /// When present the dataset is generated into <out>/dataset first.
  std::optional<std::string> synthetic;  ///< SyntheticSpec as JSON text
  std::vector<std::string> actions;
  std::vector<std::string> train_ids;  ///< empty: use the dataset's train split
  std::vector<std::string> test_ids;   ///< empty: use the dataset's test split
  NetworkConfig model = desk_network();
  DataConfig data;
  Schedule schedule;
  LossConfig loss;
  std::uint64_t seed = 1;
  InferenceConfig inference;
  bool per_action = true;  ///< one model per action, otherwise one pooled model
  bool report_wall_clock = false;
  std::filesystem::path base_dir;  ///< not serialized

  void validate() const;

  /// Small model sized for a single CPU core.
  static NetworkConfig desk_network();
};

ExperimentManifest manifest_from_json(const std::string& text, const std::string& source = "<memory>");
std::string manifest_to_json(const ExperimentManifest& m);
/// Canonical JSON of the model section, used to compare checkpoints.
std::string model_config_json(const NetworkConfig& cfg);

ExperimentManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const ExperimentManifest& m);

SyntheticSpec synthetic_from_json(const std::string& text);
std::string synthetic_to_json(const SyntheticSpec& spec);

}  // namespace exq
