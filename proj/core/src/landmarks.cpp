#include "exq/landmarks.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "exq/error.hpp"
#include "json.hpp"

namespace exq {

using nlohmann::json;

void LandmarkSequence::validate() const {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0 && frames[i].frame_index <= frames[i - 1].frame_index) {
      throw FormatError("landmark frames out of order at record " + std::to_string(i));
    }
    if (frames[i].points.size() != frames[0].points.size()) {
      throw FormatError("landmark record " + std::to_string(i) + " has " + std::to_string(frames[i].points.size()) +
                        " points, expected " + std::to_string(frames[0].points.size()));
    }
  }
}

std::vector<Point> select_landmarks(std::span<const Point> all, std::span<const int> subset) {
  std::vector<bool> seen(all.size(), false);
  std::vector<Point> out;
  out.reserve(subset.size());
  for (int idx : subset) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= all.size()) {
      throw ConfigError("landmark index " + std::to_string(idx) + " outside [0," + std::to_string(all.size()) + ")");
    }
    if (seen[static_cast<std::size_t>(idx)]) throw ConfigError("duplicate landmark index " + std::to_string(idx));
    seen[static_cast<std::size_t>(idx)] = true;
    out.push_back(all[static_cast<std::size_t>(idx)]);
  }
  return out;
}

std::vector<int> default_subset73() {
  std::vector<int> s(kSubsetLandmarks);
  std::iota(s.begin(), s.end(), 33);
  return s;
}

std::vector<int> default_mirror73() {
  std::vector<int> m(kSubsetLandmarks);
  std::iota(m.begin(), m.end(), 0);
  auto pair_runs = [&](int a, int b, int len) {
    for (int k = 0; k < len; ++k) {
      m[static_cast<std::size_t>(a + k)] = b + k;
      m[static_cast<std::size_t>(b + k)] = a + k;
    }
  };
  pair_runs(0, 9, 9);    // eyebrows
  pair_runs(18, 27, 9);  // eyes incl. pupils
  pair_runs(41, 47, 6);  // nose wings
  pair_runs(54, 59, 5);  // outer lip
  pair_runs(67, 70, 3);  // inner lip
  return m;
}

void validate_mirror_map(std::span<const int> map) {
  const auto n = static_cast<int>(map.size());
  for (int i = 0; i < n; ++i) {
    const int j = map[static_cast<std::size_t>(i)];
    if (j < 0 || j >= n) throw ConfigError("mirror map entry " + std::to_string(i) + " -> " + std::to_string(j) + " out of range");
    if (map[static_cast<std::size_t>(j)] != i) {
      throw ConfigError("mirror map is not self-inverse: " + std::to_string(i) + " -> " + std::to_string(j) + " -> " +
                        std::to_string(map[static_cast<std::size_t>(j)]));
    }
  }
}

std::vector<int> load_index_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open index list " + path.string());
  try {
    return json::parse(in).get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw FormatError("index list " + path.string() + ": " + e.what());
  }
}

void save_index_list(const std::filesystem::path& path, std::span<const int> indices) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << json(std::vector<int>(indices.begin(), indices.end())).dump() << "\n";
}

LandmarkSequence parse_landmarks(const std::string& text, std::size_t width, std::size_t height) {
  LandmarkSequence seq;
  seq.width = width;
  seq.height = height;
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      LandmarkFrame f;
      f.frame_index = rec.at("frame_index").get<std::size_t>();
      for (const auto& p : rec.at("points")) {
        if (!p.is_array() || p.size() != 2) throw FormatError("point is not an [x, y] pair");
        f.points.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      seq.frames.push_back(std::move(f));
    } catch (const json::exception& e) {
      throw FormatError("landmark line " + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("landmark line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  seq.validate();
  return seq;
}

std::string format_landmarks(const LandmarkSequence& seq) {
  std::string out;
  for (const auto& f : seq.frames) {
    json pts = json::array();
    for (const auto& p : f.points) pts.push_back({p.x, p.y});
    out += json{{"frame_index", f.frame_index}, {"points", std::move(pts)}}.dump();
    out += '\n';
  }
  return out;
}

LandmarkSequence load_landmarks(const std::filesystem::path& path, std::size_t width, std::size_t height) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open landmark file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_landmarks(ss.str(), width, height);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_landmarks(const std::filesystem::path& path, const LandmarkSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << format_landmarks(seq);
}

}  // namespace exq
