#include "exq/optim.hpp"

#include <cmath>

#include "exq/error.hpp"

namespace exq {

void zero_grad(const ParamList& params) {
  for (const auto& p : params) p.param->zero_grad();
}

void sgd_step(const ParamList& params, double lr, double momentum) {
  if (!(lr >= 0.0)) throw ConfigError("sgd_step: learning rate must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("sgd_step: momentum must lie in [0,1)");
  for (const auto& np : params) {
    Param& p = *np.param;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      p.momentum[i] = momentum * p.momentum[i] + p.grad[i];
      p.value[i] -= lr * p.momentum[i];
    }
  }
}

double step_decay_lr(double base, int epoch, int every, double factor) {
  if (every <= 0) return base;
  return base * std::pow(factor, epoch / every);
}

}  // namespace exq
