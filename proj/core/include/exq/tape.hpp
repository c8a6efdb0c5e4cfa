#pragma once

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <vector>

#include "exq/tensor.hpp"

namespace exq {

/// A learned tensor together with its gradient and momentum buffer.
struct Param {
  Tensor value;
  Tensor grad;
  Tensor momentum;

  Param() = default;
  explicit Param(Tensor v) : value(std::move(v)), grad(value.shape()), momentum(value.shape()) {}

  const Shape& shape() const { return value.shape(); }
  void zero_grad() { grad.fill(0.0); }
};

/// Handle to a node recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Records executed operations so their backward rules can be replayed in
/// reverse order.
///
/// Nodes created from constants do not receive gradients; nodes created
/// from a Param forward their accumulated gradient into Param::grad when
/// backward() runs. A Param registered twice on the same tape maps to one
/// node.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var self, const Tensor& out_grad)>;

  Var constant(Tensor value);
  Var param(Param& p);

  /// Records an op output. `inputs` decides whether the output needs a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Adds `g` into the gradient slot of `v`; a no-op for constants.
  void accumulate(Var v, const Tensor& g);

  /// Seeds d(root)/d(root) = 1 for a single-element root.
  void backward(Var root);
  void backward(Var root, const Tensor& seed);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* ref = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    Param* param = nullptr;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Param*, std::size_t> param_nodes_;
};

}  // namespace exq
