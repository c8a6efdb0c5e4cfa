#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "exq/augment.hpp"
#include "exq/landmarks.hpp"
#include "exq/video.hpp"

namespace exq {

/// Parameters of the procedural face dataset. Severity level s (0 = normal)
/// scales every action's motion by amplitudes[s].
struct SyntheticSpec {
  std::vector<std::string> actions{"sit_at_rest", "smile", "frown", "squeeze_eyes", "clench_teeth"};
  std::size_t n_subjects = 41;
  std::size_t test_subjects = 11;
  std::size_t clips_per_action = 40;
  std::size_t test_clips_per_action = 15;
  std::size_t width = 36;
  std::size_t height = 36;
  std::size_t min_length = 48;
  std::size_t max_length = 80;
  std::vector<double> amplitudes{1.0, 0.8, 0.6, 0.4, 0.2};
  double motion_scale = 3.0;   ///< multiplier on the built-in action fields
  double face_size = 26.0;     ///< face box edge in pixels
  double noise = 0.1;          ///< landmark coordinate noise, pixels (std dev)
  double pixel_noise = 0.01;   ///< frame intensity noise (std dev, [0,1] scale)
  double subject_jitter = 0.5; ///< face centre offset range, pixels
  std::uint64_t seed = 1;
  std::vector<Point> template73;  ///< face-box coordinates in [0,1]; empty selects the built-in face

  std::size_t levels() const { return amplitudes.size(); }
  void validate() const;
  bool operator==(const SyntheticSpec&) const = default;
};

std::vector<Point> default_face_template();
std::vector<Point> default_face_contour();

/// Unit-amplitude displacement of every template point, face-box units.
std::vector<Point> action_field(const std::string& action, std::span<const Point> face);

struct DatasetClip {
  std::string id;
  std::string action;
  std::size_t subject = 0;
  double label = 0.0;
  std::size_t length = 0;
  std::string frames;     ///< relative to the dataset root
  std::string landmarks;  ///< relative to the dataset root
  std::string split;      ///< "train" or "test"
  bool operator==(const DatasetClip&) const = default;
};

struct DatasetIndex {
  std::filesystem::path root;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t landmark_count = kDetectorLandmarks;
  std::string subset = "subset73.json";
  std::string mirror = "mirror73.json";
  std::vector<std::string> actions;
  std::vector<DatasetClip> clips;

  const DatasetClip& clip(const std::string& id) const;
  std::vector<std::string> ids(const std::string& split) const;
};

inline constexpr const char* kDatasetIndexFile = "dataset.json";
inline constexpr const char* kDatasetManifestFile = "experiment.json";

/// Renders every clip and writes dataset.json, subset/mirror fixtures, clip
/// frames and landmark files, plus a default experiment manifest.
DatasetIndex generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

void save_dataset_index(const DatasetIndex& index);
/// Accepts the dataset directory or the index file itself.
DatasetIndex load_dataset_index(const std::filesystem::path& path);

/// One decoded clip: frames [T×3×H×W] in [0,1] and the selected landmarks.
struct LoadedClip {
  DatasetClip meta;
  Video video;
  LandmarkSequence landmarks;  ///< already reduced to the subset
};

LoadedClip load_clip(const DatasetIndex& index, const DatasetClip& clip, std::span<const int> subset);

/// Mean distance of each landmark from its frame-0 position, averaged over
/// frames and points.
double mean_displacement(const LandmarkSequence& seq);

}  // namespace exq
