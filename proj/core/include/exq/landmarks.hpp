#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace exq {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Landmark positions for one video frame, in pixel units. Positions outside
/// the frame are legal.
struct LandmarkFrame {
  std::size_t frame_index = 0;
  std::vector<Point> points;
  bool operator==(const LandmarkFrame&) const = default;
};

struct LandmarkSequence {
  std::vector<LandmarkFrame> frames;
  std::size_t width = 0;
  std::size_t height = 0;

  /// Frame indices strictly increasing; every frame carries the same count.
  void validate() const;
  bool operator==(const LandmarkSequence&) const = default;
};

inline constexpr std::size_t kDetectorLandmarks = 106;
inline constexpr std::size_t kSubsetLandmarks = 73;

/// Points at `subset` indices, in subset order. Indices must be distinct
/// and within range.
std::vector<Point> select_landmarks(std::span<const Point> all, std::span<const int> subset);

/// The shipped 73-of-106 subset: the 33 face-boundary points are dropped.
std::vector<int> default_subset73();

/// Left/right partner of every point of the 73-point subset.
std::vector<int> default_mirror73();

/// Throws ConfigError unless `map` is a permutation equal to its own inverse.
void validate_mirror_map(std::span<const int> map);

// Structured-text I/O. Index lists are JSON integer arrays; landmark files
// hold one JSON object per line: {"frame_index": i, "points": [[x, y], ...]}.
std::vector<int> load_index_list(const std::filesystem::path& path);
void save_index_list(const std::filesystem::path& path, std::span<const int> indices);

LandmarkSequence parse_landmarks(const std::string& text, std::size_t width, std::size_t height);
std::string format_landmarks(const LandmarkSequence& seq);
LandmarkSequence load_landmarks(const std::filesystem::path& path, std::size_t width, std::size_t height);
void save_landmarks(const std::filesystem::path& path, const LandmarkSequence& seq);

}  // namespace exq
