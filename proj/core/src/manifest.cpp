#include "exq/manifest.hpp"

#include <set>

#include "config_json.hpp"
#include "exq/error.hpp"
#include "exq/feature_io.hpp"
#include "exq/sampling.hpp"
#include "exq/synthetic.hpp"

namespace exq {

InferenceMode parse_inference_mode(const std::string& s) {
  if (s == "uniform_once") return InferenceMode::uniform_once;
  if (s == "random_clips") return InferenceMode::random_clips;
  throw ConfigError("unknown inference mode '" + s + "' (expected uniform_once or random_clips)");
}

std::string to_string(InferenceMode m) {
  return m == InferenceMode::uniform_once ? "uniform_once" : "random_clips";
}

NetworkConfig ExperimentManifest::desk_network() {
  NetworkConfig c;
  c.rgb = {32, 32, 8, 64};
  c.heatmap = {16, 16, 8, 64};
  c.fusion.dim = 64;
  c.fusion.heads = 8;
  c.fusion.blocks = 3;
  return c;
}

void ExperimentManifest::validate() const {
  if (synthetic.has_value() == !dataset.empty()) {
    throw ConfigError("manifest: exactly one of 'dataset' or 'synthetic' must be given");
  }
  if (actions.empty()) throw ConfigError("manifest: 'actions' must not be empty");
  if (schedule.epochs < 1) throw ConfigError("manifest: schedule.epochs must be >= 1");
  if (schedule.batch_size < 1) throw ConfigError("manifest: schedule.batch_size must be >= 1");
  if (schedule.aug_multiplier < 1) throw ConfigError("manifest: schedule.aug_multiplier must be >= 1");
  if (!(schedule.lr >= 0)) throw ConfigError("manifest: schedule.lr must be >= 0");
  if (schedule.lr_decay_every < 1) throw ConfigError("manifest: schedule.lr_decay_every must be >= 1");
  if (!(schedule.momentum >= 0 && schedule.momentum < 1)) throw ConfigError("manifest: momentum must lie in [0, 1)");
  if (!(loss.sigma_noise > 0)) throw ConfigError("manifest: loss.sigma_noise must be positive");
  if (inference.mode == InferenceMode::random_clips && inference.clips < 1) {
    throw ConfigError("manifest: inference.clips must be >= 1");
  }
  model.validate();
  const SubclipPartition parts = partition(data.clip_frames);
  if (parts.n > model.fusion.max_subclips) {
    throw ConfigError("manifest: " + std::to_string(parts.n) + " subclips exceed fusion.max_subclips " +
                      std::to_string(model.fusion.max_subclips));
  }
  if (data.crop_height != model.rgb.height || data.crop_width != model.rgb.width) {
    throw ConfigError("manifest: data crop must equal the rgb encoder input size");
  }
  std::set<std::string> train(train_ids.begin(), train_ids.end());
  for (const auto& id : test_ids) {
    if (train.count(id)) throw ConfigError("manifest: clip '" + id + "' is in both train and test splits");
  }
}

namespace {

json schedule_json(const Schedule& s) {
  return {{"epochs", s.epochs},
          {"batch_size", s.batch_size},
          {"lr", s.lr},
          {"lr_decay_every", s.lr_decay_every},
          {"lr_decay_factor", s.lr_decay_factor},
          {"momentum", s.momentum},
          {"aug_multiplier", s.aug_multiplier}};
}

void read_schedule(const json& j, Schedule& s) {
  s.epochs = j.value("epochs", s.epochs);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.lr = j.value("lr", s.lr);
  s.lr_decay_every = j.value("lr_decay_every", s.lr_decay_every);
  s.lr_decay_factor = j.value("lr_decay_factor", s.lr_decay_factor);
  s.momentum = j.value("momentum", s.momentum);
  s.aug_multiplier = j.value("aug_multiplier", s.aug_multiplier);
}

json spec_json(const SyntheticSpec& s) {
  json tmpl = json::array();
  for (const auto& p : s.template73) tmpl.push_back({p.x, p.y});
  return {{"actions", s.actions},
          {"n_subjects", s.n_subjects},
          {"test_subjects", s.test_subjects},
          {"clips_per_action", s.clips_per_action},
          {"test_clips_per_action", s.test_clips_per_action},
          {"width", s.width},
          {"height", s.height},
          {"min_length", s.min_length},
          {"max_length", s.max_length},
          {"amplitudes", s.amplitudes},
          {"motion_scale", s.motion_scale},
          {"face_size", s.face_size},
          {"noise", s.noise},
          {"pixel_noise", s.pixel_noise},
          {"subject_jitter", s.subject_jitter},
          {"seed", s.seed},
          {"template", std::move(tmpl)}};
}

SyntheticSpec read_spec(const json& j) {
  SyntheticSpec s;
  s.actions = j.value("actions", s.actions);
  s.n_subjects = j.value("n_subjects", s.n_subjects);
  s.test_subjects = j.value("test_subjects", s.test_subjects);
  s.clips_per_action = j.value("clips_per_action", s.clips_per_action);
  s.test_clips_per_action = j.value("test_clips_per_action", s.test_clips_per_action);
  s.width = j.value("width", s.width);
  s.height = j.value("height", s.height);
  s.min_length = j.value("min_length", s.min_length);
  s.max_length = j.value("max_length", s.max_length);
  s.amplitudes = j.value("amplitudes", s.amplitudes);
  s.motion_scale = j.value("motion_scale", s.motion_scale);
  s.face_size = j.value("face_size", s.face_size);
  s.noise = j.value("noise", s.noise);
  s.pixel_noise = j.value("pixel_noise", s.pixel_noise);
  s.subject_jitter = j.value("subject_jitter", s.subject_jitter);
  s.seed = j.value("seed", s.seed);
  if (j.contains("template")) {
    for (const auto& p : j.at("template")) s.template73.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  return s;
}

json manifest_json(const ExperimentManifest& m) {
  json j{{"actions", m.actions},
         {"split", {{"train", m.train_ids}, {"test", m.test_ids}}},
         {"model", m.model},
         {"data",
          {{"clip_frames", m.data.clip_frames},
           {"crop_height", m.data.crop_height},
           {"crop_width", m.data.crop_width},
           {"flip", m.data.flip}}},
         {"schedule", schedule_json(m.schedule)},
         {"loss", {{"kind", to_string(m.loss.kind)}, {"sigma_noise", m.loss.sigma_noise}}},
         {"seed", m.seed},
         {"inference", {{"mode", to_string(m.inference.mode)}, {"clips", m.inference.clips}}},
         {"per_action", m.per_action},
         {"report_wall_clock", m.report_wall_clock}};
  if (m.synthetic) {
    j["dataset"] = {{"synthetic", json::parse(*m.synthetic)}};
  } else {
    j["dataset"] = m.dataset;
  }
  return j;
}

}  // namespace

ExperimentManifest manifest_from_json(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  ExperimentManifest m;
  try {
    const json& ds = j.at("dataset");
    if (ds.is_string()) {
      m.dataset = ds.get<std::string>();
    } else {
      m.synthetic = spec_json(read_spec(ds.at("synthetic"))).dump();
    }
    m.actions = j.at("actions").get<std::vector<std::string>>();
    if (j.contains("split")) {
      m.train_ids = j.at("split").value("train", m.train_ids);
      m.test_ids = j.at("split").value("test", m.test_ids);
    }
    if (j.contains("model")) j.at("model").get_to(m.model);
    if (j.contains("data")) {
      const json& d = j.at("data");
      m.data.clip_frames = d.value("clip_frames", m.data.clip_frames);
      m.data.crop_height = d.value("crop_height", m.data.crop_height);
      m.data.crop_width = d.value("crop_width", m.data.crop_width);
      m.data.flip = d.value("flip", m.data.flip);
    }
    if (j.contains("schedule")) read_schedule(j.at("schedule"), m.schedule);
    if (j.contains("loss")) {
      const json& l = j.at("loss");
      if (l.contains("kind")) m.loss.kind = parse_loss_kind(l.at("kind").get<std::string>());
      m.loss.sigma_noise = l.value("sigma_noise", m.loss.sigma_noise);
    }
    m.seed = j.value("seed", m.seed);
    if (j.contains("inference")) {
      const json& inf = j.at("inference");
      if (inf.contains("mode")) m.inference.mode = parse_inference_mode(inf.at("mode").get<std::string>());
      m.inference.clips = inf.value("clips", m.inference.clips);
    }
    m.per_action = j.value("per_action", m.per_action);
    m.report_wall_clock = j.value("report_wall_clock", m.report_wall_clock);
  } catch (const json::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  m.validate();
  return m;
}

std::string manifest_to_json(const ExperimentManifest& m) { return manifest_json(m).dump(2) + "\n"; }

std::string model_config_json(const NetworkConfig& cfg) { return json(cfg).dump(); }

ExperimentManifest load_manifest(const std::filesystem::path& path) {
  ExperimentManifest m = manifest_from_json(read_file(path), path.string());
  m.base_dir = path.parent_path();
  return m;
}

void save_manifest(const std::filesystem::path& path, const ExperimentManifest& m) {
  write_file(path, manifest_to_json(m));
}

SyntheticSpec synthetic_from_json(const std::string& text) {
  const json j = parse_json(text, "synthetic spec");
  try {
    SyntheticSpec s = read_spec(j);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
}

std::string synthetic_to_json(const SyntheticSpec& spec) { return spec_json(spec).dump(); }

}  // namespace exq
