#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "exq/ablate.hpp"
#include "exq/error.hpp"
#include "exq/experiment.hpp"
#include "exq/feature_io.hpp"
#include "exq/fusion.hpp"
#include "exq/gradcheck.hpp"
#include "exq/heatmap.hpp"
#include "exq/losses.hpp"
#include "exq/metrics.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using exq::Tensor;
using Clock = std::chrono::steady_clock;

namespace {

/// Collects the first few failed expectations of one criterion.
class Verdict {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_.push_back(what);
  }
  void note(const std::string& s) { info_.push_back(s); }
  bool passed() const { return failures_ == 0; }
  std::string summary() const {
    std::string out;
    for (const auto& s : passed() ? info_ : notes_) out += (out.empty() ? "" : "; ") + s;
    if (failures_ > 3) out += "; +" + std::to_string(failures_ - 3) + " more";
    return out;
  }

 private:
  int failures_ = 0;
  std::vector<std::string> notes_, info_;
};

std::string fmt(double v, const char* spec = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> random_vector(exq::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

std::vector<exq::Point> random_points(exq::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<exq::Point> pts(n);
  for (auto& p : pts) p = {rng.uniform(lo, hi), rng.uniform(lo, hi)};
  return pts;
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& perm) {
  Tensor out(x.shape());
  for (std::size_t r = 0; r < perm.size(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) = x.at(perm[r], c);
  return out;
}

void randomize_block(exq::StreamBlock& s, exq::Rng& rng) {
  for (auto* l : {&s.query, &s.key, &s.value, &s.out, &s.mlp1, &s.mlp2})
    for (double& v : l->bias.value.data()) v = rng.uniform(-0.5, 0.5);
  for (auto* p : {&s.ln1.gain, &s.ln1.bias, &s.ln2.gain, &s.ln2.bias})
    for (double& v : p->value.data()) v = rng.uniform(-0.5, 0.5);
}

void zero_branches(exq::StreamBlock& s) {
  for (auto* l : {&s.query, &s.key, &s.value, &s.out, &s.mlp1, &s.mlp2}) {
    l->weight.value.fill(0.0);
    l->bias.value.fill(0.0);
  }
}

const std::vector<std::string> kActions{"sit_at_rest", "smile", "frown", "squeeze_eyes", "clench_teeth"};

// 1 -------------------------------------------------------------------------

Verdict gradient_suite() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto results = exq::run_gradcheck_suite(7);
  const double elapsed = seconds_since(t0);
  double worst_prim = 0, worst_comp = 0;
  for (const auto& r : results) {
    v.expect(r.pass(), r.name + " rel err " + fmt(r.error) + " >= " + fmt(r.tolerance));
    v.expect(r.tolerance == (r.composed ? 1e-4 : 1e-6), r.name + " has the wrong tolerance");
    (r.composed ? worst_comp : worst_prim) = std::max(r.composed ? worst_comp : worst_prim, r.error);
  }
  v.expect(elapsed < 60.0, "suite took " + fmt(elapsed) + " s");
  v.note(std::to_string(results.size()) + " checks, primitives max " + fmt(worst_prim) + ", composed max " +
         fmt(worst_comp) + ", " + fmt(elapsed, "%.1f") + " s");
  return v;
}

// 2 -------------------------------------------------------------------------

Verdict bmc_oracle() {
  Verdict v;
  exq::Rng rng(2002);
  const double sigmas[] = {0.5, 1.0, 2.0};
  double worst = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t b = 1 + rng.below(8);
    const double sigma = sigmas[rng.below(3)];
    exq::Batch batch{random_vector(rng, b, -1, 5), {}};
    for (std::size_t i = 0; i < b; ++i) batch.labels.push_back(static_cast<double>(rng.below(5)));
    const double got = exq::bmc_loss(batch, exq::BmcConfig(sigma)).loss;
    const double err = std::abs(got - oracle::bmc(batch.predictions, batch.labels, sigma));
    worst = std::max(worst, err);
    v.expect(err <= 1e-12, "batch " + std::to_string(trial) + " differs by " + fmt(err));
    if (b == 1) v.expect(got == 0.0, "B=1 loss is " + fmt(got, "%.17g"));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const exq::Batch one{{rng.uniform(-20, 20)}, {static_cast<double>(rng.below(5))}};
    v.expect(exq::bmc_loss(one, exq::BmcConfig(sigmas[rng.below(3)])).loss == 0.0, "B=1 loss is not exactly 0");
  }
  v.note("500 batches, max |diff| " + fmt(worst) + "; B=1 exactly 0");
  return v;
}

// 3 -------------------------------------------------------------------------

Verdict mhca_oracle() {
  Verdict v;
  exq::Rng rng(3003);
  double worst = 0, worst_row = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t heads = std::size_t{1} << rng.below(3);
    const std::size_t d = heads * (1 + rng.below(16 / heads));
    const std::size_t n = 1 + rng.below(6);
    exq::StreamBlock q_side(d, rng), kv_side(d, rng);
    randomize_block(q_side, rng);
    randomize_block(kv_side, rng);
    const Tensor xq = oracle::random_tensor({n, d}, rng, -2, 2), xkv = oracle::random_tensor({n, d}, rng, -2, 2);
    exq::Tape t;
    std::vector<Tensor> attention;
    const Tensor got = t.value(exq::mhca(t, t.constant(xq), t.constant(xkv), q_side, kv_side, heads, &attention));
    const oracle::AttentionWeights w{q_side.query.weight.value, q_side.query.bias.value, kv_side.key.weight.value,
                                     kv_side.key.bias.value,    kv_side.value.weight.value, kv_side.value.bias.value,
                                     q_side.out.weight.value,   q_side.out.bias.value};
    const auto want = oracle::mhca(xq, xkv, w, heads, nullptr);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) worst = std::max(worst, std::abs(got.at(r, c) - want[r][c]));
    for (const Tensor& a : attention)
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0;
        for (std::size_t j = 0; j < n; ++j) row += a.at(i, j);
        worst_row = std::max(worst_row, std::abs(row - 1.0));
      }
    v.expect(attention.size() == heads, "attention map count differs from head count");
  }
  v.expect(worst <= 1e-12, "max |diff| " + fmt(worst));
  v.expect(worst_row <= 1e-9, "attention row sum off by " + fmt(worst_row));
  v.note("200 cases, max |diff| " + fmt(worst) + ", max row-sum error " + fmt(worst_row));
  return v;
}

// 4 -------------------------------------------------------------------------

Verdict heatmap_suite() {
  Verdict v;
  exq::Rng rng(4004);
  const exq::GaussianKernel k(1.0, 11);
  for (int trial = 0; trial < 50; ++trial) {
    auto pts = random_points(rng, 1 + rng.below(20), -3, 35);
    const Tensor base = exq::accumulate(pts, k, 32, 32);
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(rng.next()));
    v.expect(exq::max_abs_diff(base, exq::accumulate(shuffled, k, 32, 32)) <= 1e-12, "not permutation invariant");
    auto more = random_points(rng, 1 + rng.below(10), -3, 35);
    auto joined = pts;
    joined.insert(joined.end(), more.begin(), more.end());
    const Tensor sum = exq::accumulate(joined, k, 32, 32), part = exq::accumulate(more, k, 32, 32);
    double lin = 0;
    for (std::size_t i = 0; i < sum.size(); ++i) lin = std::max(lin, std::abs(sum[i] - base[i] - part[i]));
    v.expect(lin <= 1e-12, "not linear in the landmark set");

    const Tensor w = exq::smooth_and_normalize(base);
    const auto [mn, mx] = std::minmax_element(w.data().begin(), w.data().end());
    v.expect(*mx == 1.0 && *mn >= 0.0 && *mn <= 1.0, "normalized range is [" + fmt(*mn) + ", " + fmt(*mx) + "]");
  }

  exq::HeatmapConfig cfg;
  for (int trial = 0; trial < 30; ++trial) {
    const long sy = 5, sx = 3;
    auto pts = random_points(rng, 1 + rng.below(10), 7, 26);
    auto moved = pts;
    for (auto& p : moved) p = {p.x + sx, p.y + sy};
    const Tensor a = exq::frame_weights(pts, cfg, 40, 40), b = exq::frame_weights(moved, cfg, 40, 40);
    bool same = true;
    for (std::size_t y = 0; y < 40; ++y)
      for (std::size_t x = 0; x < 40; ++x) {
        const long yy = static_cast<long>(y) - sy, xx = static_cast<long>(x) - sx;
        const double want = (yy >= 0 && xx >= 0) ? a.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx)) : 0.0;
        same = same && b.at(y, x) == want;
      }
    v.expect(same, "interior translation changed the weight map");
  }

  v.expect(exq::frame_weights({}, cfg, 16, 16) == Tensor({16, 16}), "no landmarks should give an all-zero map");
  v.expect(exq::smooth_and_normalize(Tensor({8, 8}, 2.5)) == Tensor({8, 8}), "constant grid should map to zeros");
  v.expect(exq::smooth_and_normalize(Tensor({8, 8})) == Tensor({8, 8}), "zero grid should stay zero");

  double ksum = 0;
  for (double x : k.weights().data()) ksum += x;
  v.expect(k.at(5, 5) == 1.0, "kernel centre is " + fmt(k.at(5, 5), "%.17g"));
  v.expect(k.at(5, 6) == std::exp(-0.5) && k.at(4, 5) == std::exp(-0.5), "off-centre weight is not exp(-1/2)");
  v.expect(std::abs(ksum - 2 * std::numbers::pi) <= 1e-3, "kernel sum " + fmt(ksum, "%.6f"));
  v.note("permutation, linearity, range, translation, degenerate, kernel sum " + fmt(ksum, "%.6f"));
  return v;
}

// 5 -------------------------------------------------------------------------

Verdict spearman_suite() {
  Verdict v;
  exq::Rng rng(5005);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    const auto a = random_vector(rng, n, -10, 10), b = random_vector(rng, n, -10, 10);
    worst = std::max(worst, std::abs(exq::spearman_rho(a, b) - oracle::spearman_formula(a, b)));
  }
  v.expect(worst <= 1e-12, "rank-difference formula differs by " + fmt(worst));
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    const auto a = random_vector(rng, n, -3, 3), b = random_vector(rng, n, -3, 3);
    auto ta = a, tb = b;
    for (double& x : ta) x = x * x * x + x;
    for (double& x : tb) x = std::exp(x);
    v.expect(exq::spearman_rho(ta, tb) == exq::spearman_rho(a, b), "not invariant under a monotone transform");
  }
  const double ex = exq::spearman_rho(std::vector<double>{1, 2, 3}, std::vector<double>{3, 1, 2});
  v.expect(std::abs(ex + 0.5) <= 1e-15, "([1,2,3],[3,1,2]) gives " + fmt(ex, "%.17g"));
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    const auto a = random_vector(rng, n, -10, 10), b = random_vector(rng, n, -10, 10);
    v.expect(exq::mae(a, b) <= exq::rmse(a, b) + 1e-12, "mae exceeds rmse");
  }
  v.note("formula max |diff| " + fmt(worst) + ", example " + fmt(ex) + ", mae<=rmse on 1000 pairs");
  return v;
}

// 6 -------------------------------------------------------------------------

Verdict structural_invariants() {
  Verdict v;
  exq::Rng rng(6006);
  const std::size_t d = 64, heads = 8;

  exq::CrossFusionBlock ident(d, rng);
  zero_branches(ident.rgb);
  zero_branches(ident.heatmap);
  {
    const Tensor ev = oracle::random_tensor({5, d}, rng), eh = oracle::random_tensor({5, d}, rng);
    exq::Tape t;
    const auto [ov, oh] = exq::cross_fusion_block(t, t.constant(ev), t.constant(eh), ident, heads);
    v.expect(t.value(ov) == ev && t.value(oh) == eh, "zero-weight block is not the identity");
  }

  exq::FusionConfig cfg;
  cfg.dim = d;
  cfg.heads = heads;
  exq::FusionModel model(cfg, rng);
  model.positional.value.fill(0.0);
  for (auto& b : model.blocks) {
    randomize_block(b.rgb, rng);
    randomize_block(b.heatmap, rng);
  }
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Tensor ev = oracle::random_tensor({5, d}, rng), eh = oracle::random_tensor({5, d}, rng);
    exq::Tape t;
    ev = t.value(model.add_positional(t, t.constant(ev)));
    eh = t.value(model.add_positional(t, t.constant(eh)));
    exq::Var xv = t.constant(ev), xh = t.constant(eh);
    exq::Var pv = t.constant(permute_rows(ev, perm)), ph = t.constant(permute_rows(eh, perm));
    for (auto& b : model.blocks) {
      std::tie(xv, xh) = exq::cross_fusion_block(t, xv, xh, b, heads);
      std::tie(pv, ph) = exq::cross_fusion_block(t, pv, ph, b, heads);
    }
    worst = std::max({worst, exq::max_abs_diff(t.value(pv), permute_rows(t.value(xv), perm)),
                      exq::max_abs_diff(t.value(ph), permute_rows(t.value(xh), perm))});
  }
  v.expect(worst <= 1e-12, "joint permutation breaks equivariance by " + fmt(worst));

  std::size_t combos = 0;
  for (auto variant : {exq::FusionVariant::concatenation, exq::FusionVariant::summation,
                       exq::FusionVariant::cross_fusion})
    for (auto mode : {exq::OutputMode::concat_conv1d, exq::OutputMode::concat_only, exq::OutputMode::rgb_only,
                      exq::OutputMode::heatmap_only}) {
      exq::FusionConfig c = cfg;
      c.variant = variant;
      c.output_mode = mode;
      exq::FusionModel m(c, rng);
      exq::Tape t;
      const Tensor y = t.value(m.decode(t, t.constant(oracle::random_tensor({5, d}, rng)),
                                        t.constant(oracle::random_tensor({5, d}, rng))));
      v.expect(y.size() == 512, exq::to_string(variant) + "/" + exq::to_string(mode) + " decodes to " +
                                     std::to_string(y.size()));
      ++combos;
    }
  v.note("identity exact, equivariance max |diff| " + fmt(worst) + ", width 512 for " + std::to_string(combos) +
         " combinations");
  return v;
}

// 7 -------------------------------------------------------------------------

std::size_t csv_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n == 0 ? 0 : n - 1;
}

Verdict synthetic_training(const fs::path& work, int ablation_epochs) {
  Verdict v;
  exq::ExperimentManifest m;
  m.synthetic = exq::synthetic_to_json(exq::SyntheticSpec{});
  m.actions = kActions;
  const fs::path run_dir = work / "train";
  fs::remove_all(run_dir);
  const auto t0 = Clock::now();
  const auto result = exq::run_training(m, run_dir);
  const double elapsed = seconds_since(t0);
  const double avg = result.report.average_rho_percent.value_or(-100.0);
  v.expect(result.report.average_rho_percent.has_value(), "average rho undefined");
  v.expect(avg >= 80.0, "average rho " + exq::percent2(avg) + "% < 80%");
  v.expect(elapsed <= 300.0, "training took " + fmt(elapsed, "%.0f") + " s");

  exq::ExperimentManifest base = m;
  base.synthetic.reset();
  base.dataset = (run_dir / "dataset").string();
  base.schedule.epochs = ablation_epochs;
  base.schedule.lr_decay_every = std::max(1, ablation_epochs * 2 / 5);
  const fs::path ab_dir = work / "ablate";
  fs::remove_all(ab_dir);
  const auto fusion = exq::ablate(base, "fusion_variant", {"concatenation", "summation", "cross_fusion"}, ab_dir);
  const auto sigma = exq::ablate(base, "sigma", {"1", "3", "5"}, ab_dir);
  for (const auto* r : {&fusion, &sigma})
    for (const auto& row : r->rows) v.expect(row.ok, r->axis + "=" + row.value + " failed: " + row.error);
  v.expect(csv_rows(ab_dir / "ablation_fusion_variant.csv") == 3, "fusion table does not have 3 rows");
  v.expect(csv_rows(ab_dir / "ablation_sigma.csv") == 3, "sigma table does not have 3 rows");
  v.note("average rho " + exq::percent2(avg) + "% in " + fmt(elapsed, "%.0f") +
         " s; fusion and sigma tables with 3 rows each");
  return v;
}

// 8 -------------------------------------------------------------------------

Verdict determinism(const fs::path& work) {
  Verdict v;
  exq::SyntheticSpec spec;
  spec.actions = {"smile", "frown"};
  spec.n_subjects = 8;
  spec.test_subjects = 3;
  spec.clips_per_action = 8;
  spec.test_clips_per_action = 5;
  exq::ExperimentManifest m;
  m.synthetic = exq::synthetic_to_json(spec);
  m.actions = spec.actions;
  m.schedule.epochs = 2;
  m.schedule.aug_multiplier = 1;
  m.schedule.lr_decay_every = 1;
  m.inference.mode = exq::InferenceMode::random_clips;
  m.inference.clips = 3;
  const fs::path a = work / "twin_a", b = work / "twin_b";
  fs::remove_all(a);
  fs::remove_all(b);
  exq::run_training(m, a);
  exq::run_training(m, b);
  for (const char* f : {exq::kCheckpointFile, exq::kReportJsonFile, exq::kReportCsvFile}) {
    const std::string x = slurp(a / f), y = slurp(b / f);
    v.expect(!x.empty() && x == y, std::string(f) + " differs between identical runs");
  }

  const std::string bytes = slurp(a / exq::kCheckpointFile);
  const exq::Checkpoint ckpt = exq::load_checkpoint(a / exq::kCheckpointFile);
  v.expect(exq::encode_checkpoint(ckpt) == bytes, "checkpoint does not re-encode to the same bytes");
  exq::save_checkpoint(work / "copy.ckpt", ckpt);
  v.expect(exq::load_checkpoint(work / "copy.ckpt") == ckpt, "checkpoint round trip changed values");

  exq::Rng rng(8008);
  for (auto stream : {exq::Stream::rgb, exq::Stream::heatmap}) {
    exq::FeatureSequence fs{oracle::random_tensor({5, 512}, rng, -1e6, 1e6), stream};
    fs.features[0] = -0.0;
    fs.features[1] = 4.9e-324;
    const fs::path p = work / "features.exqf";
    exq::save_features(p, fs);
    const auto back = exq::load_features(p);
    v.expect(back.stream == stream && back.features.shape() == fs.features.shape() &&
                 std::memcmp(back.features.data().data(), fs.features.data().data(), fs.features.size() * 8) == 0,
             "feature file round trip is not bit-exact");
  }
  v.note("checkpoint, report.json and report.csv byte-identical; checkpoint and feature round trips exact");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string work = (fs::temp_directory_path() / "exq_acceptance").string();
  int ablation_epochs = 4;
  app.add_option("--work", work, "Scratch directory for training runs");
  app.add_option("--ablation-epochs", ablation_epochs, "Epochs per ablation sub-run")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient suite", gradient_suite},
      {"bmc oracle", bmc_oracle},
      {"mhca oracle", mhca_oracle},
      {"heatmap suite", heatmap_suite},
      {"spearman and error metrics", spearman_suite},
      {"structural invariants", structural_invariants},
      {"synthetic training and ablation tables", [&] { return synthetic_training(fs::path(work) / "c7", ablation_epochs); }},
      {"determinism and round trips", [&] { return determinism(fs::path(work) / "c8"); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, run] = criteria[i];
    bool ok = false;
    std::string detail;
    const auto t0 = Clock::now();
    try {
      const Verdict v = run();
      ok = v.passed();
      detail = v.summary();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " [" << i + 1 << "] " << name << " (" << fmt(seconds_since(t0), "%.1f")
              << " s): " << detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
