#include <algorithm>
#include <cmath>
#include <memory>

#include "exq/autograd.hpp"
#include "exq/gradcheck.hpp"
#include "exq/losses.hpp"
#include "exq/network.hpp"
#include "exq/rng.hpp"

namespace exq {

namespace {

constexpr double kPrimitiveTol = 1e-6;
constexpr double kComposedTol = 1e-4;
constexpr std::size_t kSampledCoords = 24;
// Composed blocks: loss values carry rounding noise near 1e-10 at h = 1e-5
// and key biases have an exactly zero gradient, so the denominator floor is
// raised. The head is piecewise linear along each coordinate and takes a
// wide step.
constexpr double kComposedStep = 1e-5;
constexpr double kComposedEps = 1e-6;
constexpr double kHeadStep = 1e-3;

Tensor random_tensor(const Shape& s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(s);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Values with |v| in [0.1, 1] so ReLU kinks stay far from the probe step.
Tensor away_from_zero(const Shape& s, Rng& rng) {
  Tensor t(s);
  for (double& v : t.data()) v = (rng.coin() ? 1.0 : -1.0) * rng.uniform(0.1, 1.0);
  return t;
}

// Generic scalar readout sum(y ⊙ w) so no output direction has a zero weight.
Var readout(Tape& t, Var y, const Tensor& w) { return ag::sum(t, ag::hadamard(t, y, t.constant(w))); }

std::vector<std::size_t> sample_coords(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> out;
  if (n <= k) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t i = 0; i < k; ++i) out.push_back(static_cast<std::size_t>(rng.below(n)));
  return out;
}

double check_list(const ScalarFn& f, const ParamList& params, Rng& rng, double h = 1e-5, double eps = 1e-10) {
  double worst = 0.0;
  for (const auto& np : params) {
    const std::size_t n = np.param->value.size();
    const auto coords = sample_coords(n, n > 4096 ? kSampledCoords : n, rng);
    worst = std::max(worst, grad_check_piecewise(f, *np.param, coords, h, eps));
  }
  return worst;
}

NetworkConfig tiny_network() {
  NetworkConfig c;
  c.rgb = {8, 8, 2, 8};
  c.heatmap = {4, 4, 2, 8};
  c.fusion.dim = 8;
  c.fusion.heads = 2;
  c.fusion.blocks = 1;
  c.fusion.max_subclips = 4;
  c.heatmap_volume.out_height = 4;
  c.heatmap_volume.out_width = 4;
  return c;
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed) {
  std::vector<GradCheckResult> out;
  Rng rng(seed);
  auto prim = [&](const std::string& name, double err) { out.push_back({name, err, kPrimitiveTol, false}); };
  auto comp = [&](const std::string& name, double err) { out.push_back({name, err, kComposedTol, true}); };

  {
    Param a(random_tensor({3, 4}, rng)), b(random_tensor({4, 2}, rng));
    const Tensor w = random_tensor({3, 2}, rng);
    ScalarFn f = [&](Tape& t) { return readout(t, ag::matmul(t, t.param(a), t.param(b)), w); };
    prim("matmul", std::max(grad_check(f, a), grad_check(f, b)));
  }
  {
    Param a(random_tensor({3, 4}, rng));
    const Tensor w = random_tensor({4, 3}, rng);
    prim("transpose", grad_check([&](Tape& t) { return readout(t, ag::transpose(t, t.param(a)), w); }, a));
  }
  {
    Param a(random_tensor({2, 3}, rng)), b(random_tensor({2, 3}, rng));
    const Tensor w = random_tensor({2, 3}, rng);
    ScalarFn add = [&](Tape& t) { return readout(t, ag::add(t, t.param(a), t.param(b)), w); };
    prim("add", std::max(grad_check(add, a), grad_check(add, b)));
    ScalarFn had = [&](Tape& t) { return readout(t, ag::hadamard(t, t.param(a), t.param(b)), w); };
    prim("hadamard", std::max(grad_check(had, a), grad_check(had, b)));
    prim("scale", grad_check([&](Tape& t) { return readout(t, ag::scale(t, t.param(a), -1.7), w); }, a));
  }
  {
    Param x(random_tensor({3, 5}, rng, -2.0, 2.0));
    const Tensor w = random_tensor({3, 5}, rng);
    prim("softmax", grad_check([&](Tape& t) { return readout(t, ag::softmax_lastaxis(t, t.param(x)), w); }, x));
  }
  {
    Param x(random_tensor({3, 6}, rng, -2.0, 2.0)), g(random_tensor({6}, rng, 0.5, 1.5)), b(random_tensor({6}, rng));
    const Tensor w = random_tensor({3, 6}, rng);
    ScalarFn f = [&](Tape& t) { return readout(t, ag::layer_norm(t, t.param(x), t.param(g), t.param(b)), w); };
    prim("layer_norm", grad_check(f, ParamList{{"x", &x}, {"g", &g}, {"b", &b}}));
  }
  {
    Param x(random_tensor({3, 4}, rng)), wt(random_tensor({4, 5}, rng)), b(random_tensor({5}, rng));
    const Tensor w = random_tensor({3, 5}, rng);
    ScalarFn f = [&](Tape& t) { return readout(t, ag::linear(t, t.param(x), t.param(wt), t.param(b)), w); };
    prim("linear", grad_check(f, ParamList{{"x", &x}, {"w", &wt}, {"b", &b}}));
  }
  {
    Param x(away_from_zero({4, 5}, rng));
    const Tensor w = random_tensor({4, 5}, rng);
    prim("relu", grad_check([&](Tape& t) { return readout(t, ag::relu(t, t.param(x)), w); }, x));
  }
  {
    Param a(random_tensor({3, 2}, rng)), b(random_tensor({3, 4}, rng));
    const Tensor w = random_tensor({3, 6}, rng);
    ScalarFn f = [&](Tape& t) { return readout(t, ag::concat_lastaxis(t, t.param(a), t.param(b)), w); };
    prim("concat_lastaxis", std::max(grad_check(f, a), grad_check(f, b)));
  }
  {
    Param x(random_tensor({4, 6}, rng));
    const Tensor w1 = random_tensor({4, 3}, rng), w2 = random_tensor({2, 6}, rng);
    prim("slice_lastaxis",
         grad_check([&](Tape& t) { return readout(t, ag::slice_lastaxis(t, t.param(x), 2, 3), w1); }, x));
    prim("slice_rows", grad_check([&](Tape& t) { return readout(t, ag::slice_rows(t, t.param(x), 1, 2), w2); }, x));
  }
  {
    Param x(random_tensor({6, 3}, rng));
    const Tensor w1 = random_tensor({3, 3}, rng), w2 = random_tensor({3}, rng);
    prim("group_mean_rows",
         grad_check([&](Tape& t) { return readout(t, ag::group_mean_rows(t, t.param(x), 2), w1); }, x));
    prim("mean_rows", grad_check([&](Tape& t) { return readout(t, ag::mean_rows(t, t.param(x)), w2); }, x));
    prim("sum", grad_check([&](Tape& t) { return ag::sum(t, t.param(x)); }, x));
    const Tensor w3 = random_tensor({3, 6}, rng);
    prim("reshape", grad_check([&](Tape& t) { return readout(t, ag::reshape(t, t.param(x), {3, 6}), w3); }, x));
  }
  {
    Param x(random_tensor({5, 3}, rng)), k(random_tensor({3, 3, 4}, rng)), b(random_tensor({4}, rng));
    const Tensor w = random_tensor({5, 4}, rng);
    ScalarFn f = [&](Tape& t) { return readout(t, ag::conv1d_temporal(t, t.param(x), t.param(k), t.param(b)), w); };
    prim("conv1d_temporal", grad_check(f, ParamList{{"x", &x}, {"k", &k}, {"b", &b}}));
  }
  {
    Param x(random_tensor({2, 3, 4, 4}, rng));
    const Tensor w = random_tensor({2, 12}, rng);
    prim("avg_pool_grid", grad_check([&](Tape& t) { return readout(t, ag::avg_pool_grid(t, t.param(x), 2), w); }, x));
  }
  {
    Param x(random_tensor({4}, rng));
    const Tensor w = random_tensor({4}, rng);
    ScalarFn f = [&](Tape& t) {
      std::vector<Var> parts;
      for (std::size_t i = 0; i < 4; ++i) parts.push_back(ag::reshape(t, ag::slice_lastaxis(t, t.param(x), i, 1), {1}));
      return readout(t, ag::stack_scalars(t, parts), w);
    };
    prim("stack_scalars", grad_check(f, x));
  }
  {
    Param p(random_tensor({6}, rng, 0.0, 4.0));
    const std::vector<double> y{0.0, 1.0, 2.0, 4.0, 3.0, 1.0};
    for (double sigma : {0.5, 1.0, 2.0}) {
      const BmcConfig cfg(sigma);
      prim("bmc_loss sigma=" + std::to_string(sigma).substr(0, 3),
           grad_check([&](Tape& t) { return bmc_loss(t, t.param(p), y, cfg); }, p));
    }
    prim("mse_loss", grad_check([&](Tape& t) { return mse_loss(t, t.param(p), y); }, p));
  }

  // Composed blocks.
  {
    Rng init(Rng::derive(seed, 1));
    StreamBlock q(8, init), kv(8, init);
    Param xq(random_tensor({3, 8}, rng)), xkv(random_tensor({3, 8}, rng));
    const Tensor w = random_tensor({3, 8}, rng);
    ScalarFn f = [&](Tape& t) { return readout(t, mhca(t, t.param(xq), t.param(xkv), q, kv, 2), w); };
    ParamList ps{{"xq", &xq}, {"xkv", &xkv}};
    q.append_params(ps, "q.");
    kv.append_params(ps, "kv.");
    comp("mhca", check_list(f, ps, rng, kComposedStep, kComposedEps));
  }
  {
    Rng init(Rng::derive(seed, 2));
    CrossFusionBlock block(8, init);
    Param v(random_tensor({2, 8}, rng)), h(random_tensor({2, 8}, rng));
    const Tensor wv = random_tensor({2, 8}, rng), wh = random_tensor({2, 8}, rng);
    ScalarFn f = [&](Tape& t) {
      auto [ov, oh] = cross_fusion_block(t, t.param(v), t.param(h), block, 2);
      return ag::add(t, readout(t, ov, wv), readout(t, oh, wh));
    };
    ParamList ps{{"v", &v}, {"h", &h}};
    block.append_params(ps, "block.");
    comp("cross_fusion_block", check_list(f, ps, rng, kComposedStep, kComposedEps));
  }
  {
    Rng init(Rng::derive(seed, 3));
    ToyEncoder enc(Stream::rgb, {8, 8, 2, 8}, init);
    const Tensor clip = random_tensor({16, 3, 8, 8}, rng, 0.0, 1.0);
    const Tensor w = random_tensor({1, 8}, rng);
    ParamList ps;
    enc.append_params(ps, "enc.");
    comp("encoder", check_list([&](Tape& t) { return readout(t, enc.encode(t, clip), w); }, ps, rng, kComposedStep,
                               kComposedEps));
  }
  {
    Rng init(Rng::derive(seed, 4));
    FusionConfig fc;
    fc.dim = 8;
    fc.heads = 2;
    fc.blocks = 1;
    FusionModel model(fc, init);
    Param fused(random_tensor({kFusedWidth}, rng));
    ParamList ps{{"fused", &fused}};
    model.head.append_params(ps, "head.");
    prim("regression_head",
         check_list([&](Tape& t) { return ag::sum(t, model.predict(t, t.param(fused))); }, ps, rng, kHeadStep));
  }
  {
    Rng init(Rng::derive(seed, 5));
    auto net = std::make_unique<Network>(tiny_network(), init);
    std::vector<Tensor> rgb, heat;
    const std::vector<double> labels{0.0, 2.0, 4.0};
    for (std::size_t b = 0; b < labels.size(); ++b) {
      rgb.push_back(random_tensor({32, 3, 8, 8}, rng, 0.0, 1.0));
      heat.push_back(random_tensor({32, 3, 4, 4}, rng, 0.0, 1.0));
    }
    const BmcConfig cfg(1.0);
    ScalarFn f = [&](Tape& t) {
      std::vector<Var> preds;
      for (std::size_t b = 0; b < labels.size(); ++b) preds.push_back(net->forward(t, rgb[b], heat[b]));
      return bmc_loss(t, ag::stack_scalars(t, preds), labels, cfg);
    };
    comp("pipeline_bmc", check_list(f, net->params(), rng, kComposedStep, kComposedEps));
  }
  return out;
}

}  // namespace exq
