#include "exq/losses.hpp"

#include <algorithm>
#include <cmath>

#include "exq/error.hpp"

namespace exq {
namespace {

void validate(const Batch& b) {
  if (b.predictions.empty()) throw ShapeError("loss: empty batch");
  if (b.predictions.size() != b.labels.size()) {
    throw ShapeError("loss: " + std::to_string(b.predictions.size()) + " predictions for " +
                     std::to_string(b.labels.size()) + " labels");
  }
}

Batch batch_from(const Tensor& preds, std::span<const double> labels) {
  return Batch{std::vector<double>(preds.data().begin(), preds.data().end()),
               std::vector<double>(labels.begin(), labels.end())};
}

}  // namespace

BmcConfig::BmcConfig(double sigma_noise) : sigma_noise_(sigma_noise) {
  if (!(sigma_noise > 0.0) || !std::isfinite(sigma_noise)) throw ConfigError("bmc: sigma_noise must be positive");
}

LossResult bmc_loss(const Batch& batch, const BmcConfig& cfg) {
  validate(batch);
  const std::size_t n = batch.predictions.size();
  const double tau = cfg.tau();
  LossResult r;
  r.grad.assign(n, 0.0);
  std::vector<double> logits(n);
  for (std::size_t b = 0; b < n; ++b) {
    const double p = batch.predictions[b];
    for (std::size_t j = 0; j < n; ++j) {
      const double d = p - batch.labels[j];
      logits[j] = -d * d / tau;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    const double lse = mx + std::log(z);
    r.loss += lse - logits[b];
    // d/dpred of (lse - logit_b) = sum_j (softmax_j - [j==b]) * dlogit_j/dpred
    double g = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double prob = std::exp(logits[j] - lse);
      const double dlogit = -2.0 * (p - batch.labels[j]) / tau;
      g += (prob - (j == b ? 1.0 : 0.0)) * dlogit;
    }
    r.grad[b] = g / static_cast<double>(n);
  }
  r.loss /= static_cast<double>(n);
  return r;
}

LossResult mse_loss(const Batch& batch) {
  validate(batch);
  const std::size_t n = batch.predictions.size();
  LossResult r;
  r.grad.resize(n);
  for (std::size_t b = 0; b < n; ++b) {
    const double d = batch.predictions[b] - batch.labels[b];
    r.loss += d * d;
    r.grad[b] = 2.0 * d / static_cast<double>(n);
  }
  r.loss /= static_cast<double>(n);
  return r;
}

Var bmc_loss(Tape& t, Var predictions, std::span<const double> labels, const BmcConfig& cfg) {
  const LossResult r = bmc_loss(batch_from(t.value(predictions), labels), cfg);
  return t.record(Tensor::scalar(r.loss), {predictions}, [predictions, grad = r.grad](Tape& tp, Var, const Tensor& g) {
    Tensor d = Tensor(tp.value(predictions).shape(), std::vector<double>(grad));
    for (double& v : d.data()) v *= g.item();
    tp.accumulate(predictions, d);
  });
}

Var mse_loss(Tape& t, Var predictions, std::span<const double> labels) {
  const LossResult r = mse_loss(batch_from(t.value(predictions), labels));
  return t.record(Tensor::scalar(r.loss), {predictions}, [predictions, grad = r.grad](Tape& tp, Var, const Tensor& g) {
    Tensor d = Tensor(tp.value(predictions).shape(), std::vector<double>(grad));
    for (double& v : d.data()) v *= g.item();
    tp.accumulate(predictions, d);
  });
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "bmc") return LossKind::bmc;
  if (s == "mse") return LossKind::mse;
  throw ConfigError("unknown loss '" + s + "' (expected bmc or mse)");
}

std::string to_string(LossKind k) { return k == LossKind::bmc ? "bmc" : "mse"; }

}  // namespace exq
