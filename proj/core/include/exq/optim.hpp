#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "exq/tape.hpp"

namespace exq {

struct NamedParam {
  std::string name;
  Param* param;
};
using ParamList = std::vector<NamedParam>;

void zero_grad(const ParamList& params);

/// Heavy-ball SGD: buffer <- momentum*buffer + grad; value <- value - lr*buffer.
void sgd_step(const ParamList& params, double lr, double momentum);

/// Step-decay learning rate: base * factor^floor(epoch / every).
double step_decay_lr(double base, int epoch, int every, double factor);

}  // namespace exq
