#pragma once

#include <span>
#include <string>
#include <vector>

#include "exq/tape.hpp"

namespace exq {

/// Balanced-MSE (batch Monte-Carlo) settings. The softmax temperature is
/// tied to the assumed label noise: tau = 2 * sigma_noise^2.
class BmcConfig {
 public:
  explicit BmcConfig(double sigma_noise = 1.0);
  double sigma_noise() const { return sigma_noise_; }
  double tau() const { return 2.0 * sigma_noise_ * sigma_noise_; }

 private:
  double sigma_noise_;
};

struct Batch {
  std::vector<double> predictions;
  std::vector<double> labels;
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  ///< d loss / d prediction_b
};

/// Mean over the batch of the cross-entropy of a softmax over logits
/// -(pred_b - label_j)^2 / tau with target j == b. The label set keeps
/// duplicates.
LossResult bmc_loss(const Batch& batch, const BmcConfig& cfg);
LossResult mse_loss(const Batch& batch);

/// Differentiable forms. `predictions` is a [B] node.
Var bmc_loss(Tape& t, Var predictions, std::span<const double> labels, const BmcConfig& cfg);
Var mse_loss(Tape& t, Var predictions, std::span<const double> labels);

enum class LossKind { bmc, mse };
LossKind parse_loss_kind(const std::string& s);
std::string to_string(LossKind k);

}  // namespace exq
