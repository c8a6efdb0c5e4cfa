#include <benchmark/benchmark.h>

#include "exq/heatmap.hpp"
#include "exq/losses.hpp"
#include "exq/manifest.hpp"
#include "exq/network.hpp"
#include "exq/ops.hpp"

namespace {

exq::Tensor random_tensor(const exq::Shape& s, exq::Rng& rng) {
  exq::Tensor t(s);
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  exq::Rng rng(1);
  const exq::Tensor a = random_tensor({n, n}, rng), b = random_tensor({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(exq::ops::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(256);

void BM_HeatmapVolume(benchmark::State& state) {
  const std::size_t t = 80, h = 36, w = 36;
  exq::Rng rng(2);
  exq::LandmarkSequence seq;
  seq.width = w;
  seq.height = h;
  for (std::size_t f = 0; f < t; ++f) {
    std::vector<exq::Point> pts(exq::kSubsetLandmarks);
    for (auto& p : pts) p = {rng.uniform(4, 32), rng.uniform(4, 32)};
    seq.frames.push_back({f, pts});
  }
  exq::Tensor frames({t, 3, h, w});
  for (double& v : frames.data()) v = rng.uniform();
  exq::HeatmapConfig cfg;
  cfg.sigma = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exq::build_volume(seq, frames, cfg));
}
BENCHMARK(BM_HeatmapVolume)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_NetworkStep(benchmark::State& state) {
  exq::Rng rng(3);
  exq::NetworkConfig cfg = exq::ExperimentManifest::desk_network();
  cfg.fusion.variant = static_cast<exq::FusionVariant>(state.range(0));
  exq::Network net(cfg, rng);
  const exq::Tensor rgb = random_tensor({80, 3, 32, 32}, rng), heat = random_tensor({80, 3, 16, 16}, rng);
  const std::vector<double> label{2.0};
  for (auto _ : state) {
    exq::Tape t;
    const exq::Var y = net.forward(t, rgb, heat);
    t.backward(exq::mse_loss(t, y, label));
    for (const auto& p : net.params()) p.param->zero_grad();
  }
  state.SetLabel(exq::to_string(cfg.fusion.variant));
}
BENCHMARK(BM_NetworkStep)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
