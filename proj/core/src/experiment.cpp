#include "exq/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <set>

#include "config_json.hpp"
#include "exq/autograd.hpp"
#include "exq/error.hpp"
#include "exq/heatmap.hpp"
#include "exq/sampling.hpp"

namespace exq {

namespace {

constexpr const char* kPooled = "pooled";

ClipSample gather(const LoadedClip& clip, std::span<const std::size_t> indices) {
  ClipSample s;
  s.frames = video_clip(clip.video, indices, 0, 0, clip.video.height, clip.video.width);
  s.landmarks.reserve(indices.size());
  for (std::size_t f : indices) s.landmarks.push_back(clip.landmarks.frames.at(f).points);
  return s;
}

Sample to_sample(const ClipSample& s, const ExperimentManifest& m, double label) {
  LandmarkSequence seq;
  seq.width = s.frames.dim(3);
  seq.height = s.frames.dim(2);
  for (std::size_t f = 0; f < s.landmarks.size(); ++f) seq.frames.push_back({f, s.landmarks[f]});
  return {s.frames, build_volume(seq, s.frames, m.model.heatmap_volume).data, label};
}

std::filesystem::path resolve(const ExperimentManifest& m, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || m.base_dir.empty() ? path : m.base_dir / path;
}

std::size_t model_of(const ExperimentManifest& m, const std::string& action) {
  if (!m.per_action) return 0;
  const auto it = std::find(m.actions.begin(), m.actions.end(), action);
  return static_cast<std::size_t>(it - m.actions.begin());
}

using Networks = std::vector<std::unique_ptr<Network>>;

Networks build_networks(const ExperimentManifest& m) {
  Networks nets;
  const auto names = model_names(m);
  for (std::size_t i = 0; i < names.size(); ++i) {
    Rng init(Rng::derive(m.seed, 2 * i));
    nets.push_back(std::make_unique<Network>(m.model, init));
  }
  return nets;
}

std::string checkpoint_config(const ExperimentManifest& m) {
  return json{{"model", m.model}, {"models", model_names(m)}, {"per_action", m.per_action}}.dump();
}

double batch_loss(Tape& t, Network& net, const std::vector<Sample>& batch, const ExperimentManifest& m, Var* out) {
  std::vector<Var> preds;
  std::vector<double> labels;
  for (const auto& s : batch) {
    preds.push_back(net.forward(t, s.rgb, s.heatmap));
    labels.push_back(s.label);
  }
  const Var stacked = ag::stack_scalars(t, preds);
  const Var loss = m.loss.kind == LossKind::bmc ? bmc_loss(t, stacked, labels, BmcConfig(m.loss.sigma_noise))
                                                : mse_loss(t, stacked, labels);
  *out = loss;
  return t.value(loss).item();
}

double predict(Network& net, const Sample& s) {
  Tape t;
  return t.value(net.forward(t, s.rgb, s.heatmap)).item();
}

RunReport evaluate_networks(Networks& nets, const ExperimentManifest& m, const ExperimentData& data,
                            const LogFn& log) {
  std::vector<ClipPrediction> preds;
  for (std::size_t ci = 0; ci < data.test.size(); ++ci) {
    const LoadedClip& clip = data.test[ci];
    Network& net = *nets.at(model_of(m, clip.meta.action));
    double p = 0.0;
    if (m.inference.mode == InferenceMode::uniform_once) {
      const auto idx = sample_uniform(clip.video.frames, m.data.clip_frames);
      p = predict(net, test_sample(clip, m, idx));
    } else {
      Rng rng(Rng::derive(m.seed ^ 0xE7A1ULL, ci));
      for (std::size_t k = 0; k < m.inference.clips; ++k) {
        const auto idx = sample_clip(clip.video.frames, m.data.clip_frames, rng);
        p += predict(net, test_sample(clip, m, idx));
      }
      p /= static_cast<double>(m.inference.clips);
    }
    preds.push_back({clip.meta.id, clip.meta.action, clip.meta.label, p});
  }
  if (log) log("evaluated " + std::to_string(preds.size()) + " test clips");
  RunReport r = summarize(preds, m.actions);
  r.config = json::parse(manifest_to_json(m)).dump();
  r.seed = m.seed;
  return r;
}

}  // namespace

Sample training_sample(const LoadedClip& clip, const ExperimentManifest& m, std::span<const int> mirror, Rng& rng) {
  const auto idx = sample_clip(clip.video.frames, m.data.clip_frames, rng);
  AugmentChoice choice = draw_augment(rng, clip.video.height, clip.video.width, m.data.crop_height, m.data.crop_width);
  if (!m.data.flip) choice.flip = false;
  return to_sample(apply_augment(gather(clip, idx), choice, mirror), m, clip.meta.label);
}

Sample test_sample(const LoadedClip& clip, const ExperimentManifest& m, std::span<const std::size_t> indices) {
  const AugmentChoice c = center_choice(clip.video.height, clip.video.width, m.data.crop_height, m.data.crop_width);
  return to_sample(crop_clip(gather(clip, indices), c.crop), m, clip.meta.label);
}

std::vector<std::string> model_names(const ExperimentManifest& m) {
  return m.per_action ? m.actions : std::vector<std::string>{kPooled};
}

ExperimentData prepare_data(const ExperimentManifest& m, const std::filesystem::path& work_dir) {
  m.validate();
  ExperimentData d;
  if (m.synthetic) {
    d.index = generate_synthetic(synthetic_from_json(*m.synthetic), work_dir / "dataset");
  } else {
    d.index = load_dataset_index(resolve(m, m.dataset));
  }
  d.subset = load_index_list(d.index.root / d.index.subset);
  d.mirror = load_index_list(d.index.root / d.index.mirror);
  validate_mirror_map(d.mirror);
  if (d.mirror.size() != d.subset.size()) {
    throw ConfigError("mirror map has " + std::to_string(d.mirror.size()) + " entries for a " +
                      std::to_string(d.subset.size()) + "-point subset");
  }
  const std::set<std::string> actions(m.actions.begin(), m.actions.end());
  for (const auto& a : m.actions) {
    if (std::find(d.index.actions.begin(), d.index.actions.end(), a) == d.index.actions.end()) {
      throw ConfigError("action '" + a + "' is not in dataset " + d.index.root.string());
    }
  }
  auto load_split = [&](std::vector<std::string> ids, const char* split, std::vector<LoadedClip>& out) {
    if (ids.empty()) ids = d.index.ids(split);
    for (const auto& id : ids) {
      const DatasetClip& c = d.index.clip(id);
      if (actions.count(c.action)) out.push_back(load_clip(d.index, c, d.subset));
    }
  };
  load_split(m.train_ids, "train", d.train);
  load_split(m.test_ids, "test", d.test);
  std::set<std::string> train_ids;
  for (const auto& c : d.train) train_ids.insert(c.meta.id);
  for (const auto& c : d.test) {
    if (train_ids.count(c.meta.id)) throw ConfigError("clip '" + c.meta.id + "' is in both train and test splits");
  }
  return d;
}

TrainResult train(const ExperimentManifest& m, const ExperimentData& data, const LogFn& log) {
  m.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto names = model_names(m);
  Networks nets = build_networks(m);
  std::vector<LossCurve> curves;

  for (std::size_t mi = 0; mi < names.size(); ++mi) {
    Network& net = *nets[mi];
    const ParamList params = net.params();
    std::vector<const LoadedClip*> pool;
    for (const auto& c : data.train)
      if (model_of(m, c.meta.action) == mi) pool.push_back(&c);
    LossCurve curve{names[mi], {}};
    if (pool.empty()) {
      curves.push_back(std::move(curve));
      continue;
    }
    Rng rng(Rng::derive(m.seed, 2 * mi + 1));
    const std::size_t bs = m.schedule.batch_size;
    for (int epoch = 0; epoch < m.schedule.epochs; ++epoch) {
      const double lr =
          step_decay_lr(m.schedule.lr, epoch, m.schedule.lr_decay_every, m.schedule.lr_decay_factor);
      double sum = 0.0;
      std::size_t batches = 0;
      for (std::size_t pass = 0; pass < m.schedule.aug_multiplier; ++pass) {
        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t b0 = 0; b0 < order.size(); b0 += bs) {
          std::vector<Sample> batch;
          for (std::size_t k = b0; k < std::min(order.size(), b0 + bs); ++k) {
            batch.push_back(training_sample(*pool[order[k]], m, data.mirror, rng));
          }
          Tape t;
          Var loss{};
          const double value = batch_loss(t, net, batch, m, &loss);
          if (!std::isfinite(value)) {
            throw DivergenceError("model '" + names[mi] + "': non-finite loss at epoch " + std::to_string(epoch + 1) +
                                  ", batch " + std::to_string(batches + 1));
          }
          t.backward(loss);
          sgd_step(params, lr, m.schedule.momentum);
          zero_grad(params);
          sum += value;
          ++batches;
        }
      }
      curve.epoch_loss.push_back(sum / static_cast<double>(batches));
      if (log) {
        log("model " + names[mi] + " epoch " + std::to_string(epoch + 1) + "/" + std::to_string(m.schedule.epochs) +
            " loss " + std::to_string(curve.epoch_loss.back()) + " lr " + std::to_string(lr));
      }
    }
    curves.push_back(std::move(curve));
  }

  TrainResult out;
  out.checkpoint.config = checkpoint_config(m);
  for (std::size_t mi = 0; mi < names.size(); ++mi) capture_params(out.checkpoint, nets[mi]->params(names[mi] + "/"));
  out.report = evaluate_networks(nets, m, data, log);
  out.report.loss_curves = std::move(curves);
  if (m.report_wall_clock) {
    out.report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

RunReport evaluate(const Checkpoint& ckpt, const ExperimentManifest& m, const ExperimentData& data, const LogFn& log) {
  m.validate();
  const json have = parse_json(ckpt.config, "checkpoint config");
  const json want = parse_json(checkpoint_config(m), "manifest");
  const auto diff = json_diff(have, want);
  if (!diff.empty()) {
    std::string msg = "checkpoint does not match manifest (checkpoint != manifest):";
    for (const auto& d : diff) msg += "\n  " + d;
    throw ConfigError(msg);
  }
  Networks nets = build_networks(m);
  const auto names = model_names(m);
  for (std::size_t i = 0; i < names.size(); ++i) restore_params(ckpt, nets[i]->params(names[i] + "/"));
  return evaluate_networks(nets, m, data, log);
}

DescentProbe descent_probe(const ExperimentManifest& m, const ExperimentData& data, double lr, std::size_t batch) {
  if (data.train.empty()) throw ConfigError("descent probe: no training clips");
  Rng init(Rng::derive(m.seed, 0));
  Network net(m.model, init);
  const ParamList params = net.params();
  Rng rng(Rng::derive(m.seed, 1));
  std::vector<Sample> samples;
  for (std::size_t k = 0; k < batch; ++k) {
    samples.push_back(training_sample(data.train[k % data.train.size()], m, data.mirror, rng));
  }
  DescentProbe probe;
  {
    Tape t;
    Var loss{};
    probe.before = batch_loss(t, net, samples, m, &loss);
    t.backward(loss);
    sgd_step(params, lr, 0.0);
    zero_grad(params);
  }
  Tape t;
  Var loss{};
  probe.after = batch_loss(t, net, samples, m, &loss);
  return probe;
}

TrainResult run_training(const ExperimentManifest& m, const std::filesystem::path& out_dir, const LogFn& log) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
  const ExperimentData data = prepare_data(m, out_dir);
  TrainResult r = train(m, data, log);
  save_checkpoint(out_dir / kCheckpointFile, r.checkpoint);
  emit_report(out_dir / kReportJsonFile, r.report, ReportFormat::structured_text);
  emit_report(out_dir / kReportCsvFile, r.report, ReportFormat::delimited_table);
  return r;
}

}  // namespace exq
