#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "exq/checkpoint.hpp"
#include "exq/manifest.hpp"
#include "exq/report.hpp"
#include "exq/synthetic.hpp"

namespace exq {

using LogFn = std::function<void(const std::string&)>;

/// Network inputs for one clip.
struct Sample {
  Tensor rgb;      ///< [T×3×crop_h×crop_w]
  Tensor heatmap;  ///< [T×3×out_h×out_w]
  double label = 0.0;
};

/// Random temporal window, random crop and optional flip, then the heatmap volume.
Sample training_sample(const LoadedClip& clip, const ExperimentManifest& m, std::span<const int> mirror, Rng& rng);

/// Given frame indices, centre crop, no flip.
Sample test_sample(const LoadedClip& clip, const ExperimentManifest& m, std::span<const std::size_t> indices);

/// Loaded clips and fixtures of one experiment.
struct ExperimentData {
  DatasetIndex index;
  std::vector<int> subset;
  std::vector<int> mirror;
  std::vector<LoadedClip> train;
  std::vector<LoadedClip> test;
};

/// Resolves the manifest's dataset (generating a synthetic one under
/// `work_dir`/dataset when requested) and loads the split's clips.
ExperimentData prepare_data(const ExperimentManifest& m, const std::filesystem::path& work_dir);

/// Names of the models a run trains: the actions, or "pooled".
std::vector<std::string> model_names(const ExperimentManifest& m);

struct TrainResult {
  Checkpoint checkpoint;
  RunReport report;
};

/// Trains every model then evaluates on the test split.
TrainResult train(const ExperimentManifest& m, const ExperimentData& data, const LogFn& log = {});

/// Rejects a checkpoint whose model configuration differs from the manifest,
/// listing each differing field.
RunReport evaluate(const Checkpoint& ckpt, const ExperimentManifest& m, const ExperimentData& data,
                   const LogFn& log = {});

struct DescentProbe {
  double before = 0.0;
  double after = 0.0;
};

/// Loss on a fixed batch of training clips before and after one plain SGD
/// step of size `lr` from a freshly initialised model.
DescentProbe descent_probe(const ExperimentManifest& m, const ExperimentData& data, double lr,
                           std::size_t batch = 4);

/// prepare_data + train, writing model.ckpt, report.json and report.csv to `out_dir`.
TrainResult run_training(const ExperimentManifest& m, const std::filesystem::path& out_dir, const LogFn& log = {});

inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kReportJsonFile = "report.json";
inline constexpr const char* kReportCsvFile = "report.csv";

}  // namespace exq
