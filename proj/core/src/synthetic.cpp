#include "exq/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "config_json.hpp"
#include "exq/error.hpp"
#include "exq/feature_io.hpp"
#include "exq/manifest.hpp"
#include "exq/rng.hpp"

namespace exq {

namespace {

constexpr double kPi = std::numbers::pi;

// Subset index ranges of the built-in face.
constexpr int kBrowEnd = 18;
constexpr int kEyeBegin = 18, kEyeEnd = 36;
constexpr int kLeftPupil = 26, kRightPupil = 35;
constexpr int kNoseBegin = 36, kNoseEnd = 53;
constexpr int kNoseWingBegin = 41;
constexpr int kMouthBegin = 53;
constexpr double kMouthCy = 0.765;

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

Point reflect(Point p) { return {1.0 - p.x, p.y}; }

double quantize(double v) { return std::round(v * 1024.0) / 1024.0; }

void check_range(std::size_t n, const char* what) {
  if (n == 0) throw ConfigError(std::string("synthetic spec: ") + what + " must be positive");
}

struct Subject {
  double cx = 0, cy = 0, scale = 1;
  double skin[3]{};
  double bg[3]{};
  double tex_fx = 0, tex_fy = 0, tex_phase = 0;
};

Subject make_subject(const SyntheticSpec& spec, std::uint64_t index) {
  Rng rng(Rng::derive(spec.seed ^ 0x5a5a5a5aULL, index));
  Subject s;
  s.cx = (static_cast<double>(spec.width) - 1.0) / 2.0 + rng.uniform(-spec.subject_jitter, spec.subject_jitter);
  s.cy = (static_cast<double>(spec.height) - 1.0) / 2.0 + rng.uniform(-spec.subject_jitter, spec.subject_jitter);
  s.scale = spec.face_size * rng.uniform(0.97, 1.03);
  const double tone = rng.uniform(0.55, 0.9);
  s.skin[0] = tone;
  s.skin[1] = tone * 0.78;
  s.skin[2] = tone * 0.66;
  for (double& b : s.bg) b = rng.uniform(0.15, 0.45);
  s.tex_fx = rng.uniform(0.4, 0.9);
  s.tex_fy = rng.uniform(0.4, 0.9);
  s.tex_phase = rng.uniform(0.0, 2.0 * kPi);
  return s;
}

struct BlobStyle {
  double color[3];
  double strength;
};

BlobStyle blob_style(int i) {
  if (i < kBrowEnd) return {{0.12, 0.08, 0.06}, 0.85};
  if (i == kLeftPupil || i == kRightPupil) return {{0.05, 0.05, 0.08}, 0.95};
  if (i < kEyeEnd) return {{0.2, 0.15, 0.15}, 0.7};
  if (i < kNoseEnd) return {{0.5, 0.3, 0.25}, 0.45};
  return {{0.7, 0.18, 0.22}, 0.8};
}

void render_frame(Video& v, std::size_t f, const Subject& s, std::span<const Point> pts, Rng& rng,
                  double pixel_noise) {
  const std::size_t h = v.height, w = v.width;
  std::vector<double> img(3 * h * w);
  const double rx = 0.44 * s.scale, ry = 0.54 * s.scale;
  const double fcx = s.cx, fcy = s.cy - 0.05 * s.scale;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double xd = static_cast<double>(x), yd = static_cast<double>(y);
      const double tex = 0.07 * std::sin(s.tex_fx * xd + s.tex_phase) * std::cos(s.tex_fy * yd);
      const double ex = (xd - fcx) / rx, ey = (yd - fcy) / ry;
      const double r = std::sqrt(ex * ex + ey * ey);
      const double alpha = 1.0 / (1.0 + std::exp((r - 1.0) * 12.0));
      for (std::size_t c = 0; c < 3; ++c) {
        img[(c * h + y) * w + x] = (1.0 - alpha) * (s.bg[c] + tex) + alpha * s.skin[c];
      }
    }
  constexpr double kBlobSigma = 0.8;
  constexpr long kBlobRadius = 3;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const BlobStyle style = blob_style(static_cast<int>(i));
    const long px = std::lround(pts[i].x), py = std::lround(pts[i].y);
    for (long y = py - kBlobRadius; y <= py + kBlobRadius; ++y) {
      if (y < 0 || y >= static_cast<long>(h)) continue;
      for (long x = px - kBlobRadius; x <= px + kBlobRadius; ++x) {
        if (x < 0 || x >= static_cast<long>(w)) continue;
        const double dx = static_cast<double>(x) - pts[i].x, dy = static_cast<double>(y) - pts[i].y;
        const double g = style.strength * std::exp(-(dx * dx + dy * dy) / (2.0 * kBlobSigma * kBlobSigma));
        for (std::size_t c = 0; c < 3; ++c) {
          double& px_val = img[(c * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x)];
          px_val = px_val * (1.0 - g) + style.color[c] * g;
        }
      }
    }
  }
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double val = img[(c * h + y) * w + x] + pixel_noise * rng.normal();
        v.at(f, c, y, x) = static_cast<std::uint8_t>(std::lround(std::clamp(val, 0.0, 1.0) * 255.0));
      }
}

std::vector<std::size_t> severity_schedule(std::size_t count, std::size_t levels, Rng& rng) {
  std::vector<std::size_t> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = k % levels;
  for (std::size_t k = count; k > 1; --k) std::swap(out[k - 1], out[rng.below(k)]);
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (actions.empty()) throw ConfigError("synthetic spec: at least one action is required");
  check_range(width, "width");
  check_range(height, "height");
  check_range(min_length, "min_length");
  if (max_length < min_length) throw ConfigError("synthetic spec: max_length < min_length");
  if (amplitudes.empty()) throw ConfigError("synthetic spec: amplitudes must not be empty");
  for (std::size_t i = 1; i < amplitudes.size(); ++i) {
    if (!(amplitudes[i] < amplitudes[i - 1])) {
      throw ConfigError("synthetic spec: amplitudes must strictly decrease with severity (level " + std::to_string(i) +
                        ")");
    }
  }
  if (n_subjects <= test_subjects || test_subjects == 0) {
    throw ConfigError("synthetic spec: need 0 < test_subjects < n_subjects");
  }
  if (!(face_size > 0) || noise < 0 || pixel_noise < 0 || subject_jitter < 0 || !(motion_scale >= 0)) {
    throw ConfigError("synthetic spec: face_size must be positive and noise terms non-negative");
  }
  if (!template73.empty() && template73.size() != kSubsetLandmarks) {
    throw ConfigError("synthetic spec: template must have 73 points, got " + std::to_string(template73.size()));
  }
}

std::vector<Point> default_face_template() {
  std::vector<Point> p(kSubsetLandmarks);
  for (int i = 0; i < 9; ++i) {
    const double t = i / 8.0;
    p[static_cast<std::size_t>(i)] = {0.16 + 0.26 * t, 0.29 - 0.04 * std::sin(kPi * t)};
  }
  for (int k = 0; k < 8; ++k) {
    const double a = 2.0 * kPi * k / 8.0;
    p[static_cast<std::size_t>(18 + k)] = {0.32 + 0.09 * std::cos(a), 0.41 + 0.05 * std::sin(a)};
  }
  p[kLeftPupil] = {0.32, 0.41};
  for (int i = 0; i < 5; ++i) p[static_cast<std::size_t>(36 + i)] = {0.5, 0.42 + 0.05 * i};
  for (int j = 0; j < 6; ++j) p[static_cast<std::size_t>(41 + j)] = {0.465 - 0.012 * j, 0.53 + 0.022 * j};
  auto outer = [](double phi) { return Point{0.5 - 0.16 * std::sin(phi), kMouthCy - 0.06 * std::cos(phi)}; };
  auto inner = [](double phi) { return Point{0.5 - 0.10 * std::sin(phi), kMouthCy - 0.02 * std::cos(phi)}; };
  p[53] = outer(0.0);
  for (int j = 0; j < 5; ++j) p[static_cast<std::size_t>(54 + j)] = outer(kPi * (j + 1) / 6.0);
  p[64] = outer(kPi);
  p[65] = inner(0.0);
  p[66] = inner(kPi);
  for (int j = 0; j < 3; ++j) p[static_cast<std::size_t>(67 + j)] = inner(kPi * (j + 1) / 4.0);
  // Right-hand partners mirror the left-hand points.
  const auto mirror = default_mirror73();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto j = static_cast<std::size_t>(mirror[i]);
    if (j > i) p[j] = reflect(p[i]);
  }
  return p;
}

std::vector<Point> default_face_contour() {
  std::vector<Point> c(kDetectorLandmarks - kSubsetLandmarks);
  const double n = static_cast<double>(c.size() - 1);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double a = kPi - kPi * static_cast<double>(k) / n;
    c[k] = {0.5 + 0.42 * std::cos(a), 0.45 + 0.48 * std::sin(a)};
  }
  return c;
}

std::vector<Point> action_field(const std::string& action, std::span<const Point> face) {
  if (face.size() != kSubsetLandmarks) throw ConfigError("action_field: face must have 73 points");
  std::vector<Point> d(face.size());
  auto eye_center = [&](int i) { return face[static_cast<std::size_t>(i < 27 ? kLeftPupil : kRightPupil)]; };
  for (int i = 0; i < static_cast<int>(face.size()); ++i) {
    const Point p = face[static_cast<std::size_t>(i)];
    Point& out = d[static_cast<std::size_t>(i)];
    const double side = sgn(p.x - 0.5);
    const bool brow = i < kBrowEnd;
    const bool eye = i >= kEyeBegin && i < kEyeEnd;
    const bool lid = eye && i != kLeftPupil && i != kRightPupil;
    const bool wing = i >= kNoseWingBegin && i < kNoseEnd;
    const bool mouth = i >= kMouthBegin;
    const double lat = mouth ? std::min(1.0, std::abs(p.x - 0.5) / 0.16) : 0.0;
    const double lid_dy = lid ? -(p.y - eye_center(i).y) : 0.0;
    if (action == "sit_at_rest") {
      if (lid) out.y = 0.9 * lid_dy;
      if (brow) out.y = -0.05;
      if (mouth && p.y > kMouthCy) out.y = 0.03;
    } else if (action == "smile") {
      if (mouth) out = {side * 0.10 * lat, -0.06 * lat - 0.02};
      if (wing) out = {side * 0.015, -0.025};
      if (lid && p.y > eye_center(i).y) out.y = -0.03;
    } else if (action == "frown") {
      if (brow) out = {-side * 0.05, 0.07};
      if (mouth) out.y = 0.05 * lat;
      if (i >= kNoseBegin && i < kNoseWingBegin) out.y = -0.01;
    } else if (action == "squeeze_eyes") {
      if (lid) out.y = 0.95 * lid_dy + 0.02;
      if (eye && !lid) out.y = 0.02;
      if (brow) out.y = 0.07;
      if (wing) out.y = -0.03;
    } else if (action == "clench_teeth") {
      if (mouth) out = {side * 0.10 * lat, p.y < kMouthCy ? -0.05 : (p.y > kMouthCy ? 0.06 : 0.0)};
      if (wing) out.x = side * 0.02;
    } else {
      throw ConfigError("unknown synthetic action '" + action + "'");
    }
  }
  return d;
}

const DatasetClip& DatasetIndex::clip(const std::string& id) const {
  for (const auto& c : clips)
    if (c.id == id) return c;
  throw ConfigError("clip '" + id + "' is not in dataset " + (root / kDatasetIndexFile).string());
}

std::vector<std::string> DatasetIndex::ids(const std::string& split) const {
  std::vector<std::string> out;
  for (const auto& c : clips)
    if (c.split == split) out.push_back(c.id);
  return out;
}

void save_dataset_index(const DatasetIndex& index) {
  json clips = json::array();
  for (const auto& c : index.clips) {
    clips.push_back({{"id", c.id},
                     {"action", c.action},
                     {"subject", c.subject},
                     {"label", c.label},
                     {"length", c.length},
                     {"frames", c.frames},
                     {"landmarks", c.landmarks},
                     {"split", c.split}});
  }
  const json doc{{"width", index.width},   {"height", index.height}, {"landmark_count", index.landmark_count},
                 {"subset", index.subset}, {"mirror", index.mirror}, {"actions", index.actions},
                 {"clips", std::move(clips)}};
  write_file(index.root / kDatasetIndexFile, doc.dump(2) + "\n");
}

DatasetIndex load_dataset_index(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / kDatasetIndexFile : path;
  const json doc = parse_json(read_file(file), file.string());
  DatasetIndex index;
  index.root = file.parent_path();
  try {
    index.width = doc.at("width").get<std::size_t>();
    index.height = doc.at("height").get<std::size_t>();
    index.landmark_count = doc.value("landmark_count", index.landmark_count);
    index.subset = doc.value("subset", index.subset);
    index.mirror = doc.value("mirror", index.mirror);
    index.actions = doc.at("actions").get<std::vector<std::string>>();
    for (const auto& c : doc.at("clips")) {
      DatasetClip clip;
      clip.id = c.at("id").get<std::string>();
      clip.action = c.at("action").get<std::string>();
      clip.subject = c.value("subject", std::size_t{0});
      clip.label = c.at("label").get<double>();
      clip.length = c.at("length").get<std::size_t>();
      clip.frames = c.at("frames").get<std::string>();
      clip.landmarks = c.at("landmarks").get<std::string>();
      clip.split = c.value("split", std::string("train"));
      index.clips.push_back(std::move(clip));
    }
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  return index;
}

DatasetIndex generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "clips", ec);
  if (ec) throw Error("cannot create " + (out_dir / "clips").string() + ": " + ec.message());

  const std::vector<Point> face = spec.template73.empty() ? default_face_template() : spec.template73;
  const std::vector<Point> contour = default_face_contour();
  const std::vector<int> subset = default_subset73();

  DatasetIndex index;
  index.root = out_dir;
  index.width = spec.width;
  index.height = spec.height;
  index.actions = spec.actions;
  save_index_list(out_dir / index.subset, subset);
  save_index_list(out_dir / index.mirror, default_mirror73());

  const std::size_t train_subjects = spec.n_subjects - spec.test_subjects;
  std::uint64_t clip_counter = 0;
  for (std::size_t a = 0; a < spec.actions.size(); ++a) {
    const std::string& action = spec.actions[a];
    const std::vector<Point> field = action_field(action, face);
    for (const std::string split : {"train", "test"}) {
      const bool test = split == "test";
      const std::size_t count = test ? spec.test_clips_per_action : spec.clips_per_action;
      Rng order_rng(Rng::derive(spec.seed, 1000 + 2 * a + (test ? 1 : 0)));
      const auto severities = severity_schedule(count, spec.levels(), order_rng);
      for (std::size_t k = 0; k < count; ++k) {
        Rng rng(Rng::derive(spec.seed, clip_counter++));
        const std::size_t subject = test ? train_subjects + k % spec.test_subjects : k % train_subjects;
        const Subject subj = make_subject(spec, subject);
        const std::size_t level = severities[k];
        const double amp = spec.amplitudes[level] * spec.motion_scale;
        const std::size_t len = spec.min_length + rng.below(spec.max_length - spec.min_length + 1);

        DatasetClip clip;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%03zu", k);
        clip.id = action + "_" + split + "_" + buf;
        clip.action = action;
        clip.subject = subject;
        clip.label = static_cast<double>(level);
        clip.length = len;
        clip.frames = "clips/" + clip.id + ".exqv";
        clip.landmarks = "clips/" + clip.id + ".jsonl";
        clip.split = split;

        Video video(len, spec.height, spec.width);
        LandmarkSequence seq;
        seq.width = spec.width;
        seq.height = spec.height;
        std::vector<Point> clean(face.size());
        for (std::size_t f = 0; f < len; ++f) {
          const double s = std::sin(kPi * static_cast<double>(f) / static_cast<double>(len));
          const double e = amp * s * s;
          for (std::size_t i = 0; i < face.size(); ++i) {
            const double u = face[i].x + e * field[i].x, v = face[i].y + e * field[i].y;
            clean[i] = {subj.cx + (u - 0.5) * subj.scale, subj.cy + (v - 0.5) * subj.scale};
          }
          render_frame(video, f, subj, clean, rng, spec.pixel_noise);
          LandmarkFrame lf;
          lf.frame_index = f;
          lf.points.resize(kDetectorLandmarks);
          for (std::size_t c = 0; c < contour.size(); ++c) {
            lf.points[c] = {quantize(subj.cx + (contour[c].x - 0.5) * subj.scale + spec.noise * rng.normal()),
                            quantize(subj.cy + (contour[c].y - 0.5) * subj.scale + spec.noise * rng.normal())};
          }
          for (std::size_t i = 0; i < clean.size(); ++i) {
            lf.points[static_cast<std::size_t>(subset[i])] = {quantize(clean[i].x + spec.noise * rng.normal()),
                                                              quantize(clean[i].y + spec.noise * rng.normal())};
          }
          seq.frames.push_back(std::move(lf));
        }
        save_video(out_dir / clip.frames, video);
        save_landmarks(out_dir / clip.landmarks, seq);
        index.clips.push_back(std::move(clip));
      }
    }
  }
  save_dataset_index(index);

  ExperimentManifest m;
  m.dataset = kDatasetIndexFile;
  m.actions = spec.actions;
  m.train_ids = index.ids("train");
  m.test_ids = index.ids("test");
  m.seed = spec.seed;
  save_manifest(out_dir / kDatasetManifestFile, m);
  return index;
}

LoadedClip load_clip(const DatasetIndex& index, const DatasetClip& clip, std::span<const int> subset) {
  LoadedClip out;
  out.meta = clip;
  out.video = load_video(index.root / clip.frames);
  if (out.video.width != index.width || out.video.height != index.height) {
    throw FormatError((index.root / clip.frames).string() + ": frame size " + std::to_string(out.video.width) + "x" +
                      std::to_string(out.video.height) + " does not match dataset " + std::to_string(index.width) +
                      "x" + std::to_string(index.height));
  }
  const LandmarkSequence full = load_landmarks(index.root / clip.landmarks, index.width, index.height);
  if (full.frames.size() != out.video.frames) {
    throw FormatError((index.root / clip.landmarks).string() + ": " + std::to_string(full.frames.size()) +
                      " landmark frames for " + std::to_string(out.video.frames) + " video frames");
  }
  out.landmarks.width = full.width;
  out.landmarks.height = full.height;
  for (const auto& f : full.frames) {
    out.landmarks.frames.push_back({f.frame_index, select_landmarks(f.points, subset)});
  }
  return out;
}

double mean_displacement(const LandmarkSequence& seq) {
  if (seq.frames.empty()) return 0.0;
  const auto& base = seq.frames.front().points;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : seq.frames)
    for (std::size_t i = 0; i < f.points.size(); ++i) {
      sum += std::hypot(f.points[i].x - base[i].x, f.points[i].y - base[i].y);
      ++n;
    }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace exq
