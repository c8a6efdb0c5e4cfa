#include "exq/tape.hpp"

#include "exq/error.hpp"

namespace exq {

Var Tape::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::param(Param& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
  Node n;
  n.ref = &p.value;
  n.requires_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var{nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (Var v : inputs) needs = needs || nodes_.at(v.id).requires_grad;
  Node n;
  n.owned = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  bool needs = false;
  for (Var v : inputs) needs = needs || nodes_.at(v.id).requires_grad;
  Node n;
  n.owned = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.ref ? *n.ref : n.owned;
}

void Tape::accumulate(Var v, const Tensor& g) {
  Node& n = nodes_.at(v.id);
  if (!n.requires_grad) return;
  const Tensor& val = n.ref ? *n.ref : n.owned;
  if (g.shape() != val.shape()) {
    throw ShapeError("gradient of shape " + shape_str(g.shape()) + " for node of shape " + shape_str(val.shape()));
  }
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

void Tape::backward(Var root) {
  const Tensor& v = value(root);
  if (v.size() != 1) throw ShapeError("backward() without a seed needs a single-element root, got " + shape_str(v.shape()));
  backward(root, Tensor(v.shape(), 1.0));
}

void Tape::backward(Var root, const Tensor& seed) {
  accumulate(root, seed);
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad) continue;
    if (n.param) {
      Tensor& pg = n.param->grad;
      for (std::size_t j = 0; j < pg.size(); ++j) pg[j] += n.grad[j];
    } else if (n.backward) {
      n.backward(*this, Var{i}, n.grad);
    }
    // Release intermediate storage as soon as it has been propagated.
    n.grad = Tensor();
    n.has_grad = false;
  }
}

}  // namespace exq
