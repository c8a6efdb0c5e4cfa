#include "exq/autograd.hpp"

#include <utility>

#include "exq/error.hpp"

namespace exq::ag {

Var matmul(Tape& t, Var a, Var b) {
  Tensor out = ops::matmul(t.value(a), t.value(b));
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, Var, const Tensor& g) {
    auto grads = ops::matmul_backward(tp.value(a), tp.value(b), g);
    tp.accumulate(a, grads.da);
    tp.accumulate(b, grads.db);
  });
}

Var transpose(Tape& t, Var a) {
  Tensor out = ops::transpose(t.value(a));
  return t.record(std::move(out), {a}, [a](Tape& tp, Var, const Tensor& g) { tp.accumulate(a, ops::transpose(g)); });
}

Var add(Tape& t, Var a, Var b) {
  Tensor out = ops::add(t.value(a), t.value(b));
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, Var, const Tensor& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var scale(Tape& t, Var a, double s) {
  Tensor out = ops::scale(t.value(a), s);
  return t.record(std::move(out), {a}, [a, s](Tape& tp, Var, const Tensor& g) { tp.accumulate(a, ops::scale(g, s)); });
}

Var hadamard(Tape& t, Var a, Var b) {
  Tensor out = ops::hadamard(t.value(a), t.value(b));
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, Var, const Tensor& g) {
    tp.accumulate(a, ops::hadamard(g, tp.value(b)));
    tp.accumulate(b, ops::hadamard(g, tp.value(a)));
  });
}

Var softmax_lastaxis(Tape& t, Var x) {
  Tensor out = ops::softmax_lastaxis(t.value(x));
  return t.record(std::move(out), {x}, [x](Tape& tp, Var self, const Tensor& g) {
    tp.accumulate(x, ops::softmax_backward(tp.value(self), g));
  });
}

Var layer_norm(Tape& t, Var x, Var gain, Var bias, double eps) {
  Tensor out = ops::layer_norm(t.value(x), t.value(gain), t.value(bias), eps);
  return t.record(std::move(out), {x, gain, bias}, [x, gain, bias, eps](Tape& tp, Var, const Tensor& g) {
    auto grads = ops::layer_norm_backward(tp.value(x), tp.value(gain), g, eps);
    tp.accumulate(x, grads.dx);
    tp.accumulate(gain, grads.dgain.reshaped(tp.value(gain).shape()));
    tp.accumulate(bias, grads.dbias.reshaped(tp.value(bias).shape()));
  });
}

Var linear(Tape& t, Var x, Var w, Var b) {
  Tensor out = ops::linear(t.value(x), t.value(w), t.value(b));
  return t.record(std::move(out), {x, w, b}, [x, w, b](Tape& tp, Var, const Tensor& g) {
    auto grads = ops::linear_backward(tp.value(x), tp.value(w), g, tp.requires_grad(x));
    if (tp.requires_grad(x)) tp.accumulate(x, grads.dx);
    tp.accumulate(w, grads.dw);
    tp.accumulate(b, grads.db.reshaped(tp.value(b).shape()));
  });
}

Var relu(Tape& t, Var x) {
  Tensor out = ops::relu(t.value(x));
  return t.record(std::move(out), {x}, [x](Tape& tp, Var, const Tensor& g) {
    tp.accumulate(x, ops::relu_backward(tp.value(x), g));
  });
}

Var concat_lastaxis(Tape& t, Var a, Var b) {
  Tensor out = ops::concat_lastaxis(t.value(a), t.value(b));
  const std::size_t p = t.value(a).cols();
  return t.record(std::move(out), {a, b}, [a, b, p](Tape& tp, Var, const Tensor& g) {
    auto [ga, gb] = ops::split_lastaxis(g, p);
    tp.accumulate(a, ga);
    tp.accumulate(b, gb);
  });
}

Var concat_lastaxis(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_lastaxis: no operands");
  Tensor out = t.value(parts[0]);
  std::vector<std::size_t> widths{out.cols()};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    out = ops::concat_lastaxis(out, t.value(parts[i]));
    widths.push_back(t.value(parts[i]).cols());
  }
  return t.record(std::move(out), parts, [parts, widths](Tape& tp, Var, const Tensor& g) {
    std::size_t offset = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      tp.accumulate(parts[i], ops::slice_lastaxis(g, offset, widths[i]));
      offset += widths[i];
    }
  });
}

Var slice_lastaxis(Tape& t, Var x, std::size_t begin, std::size_t count) {
  Tensor out = ops::slice_lastaxis(t.value(x), begin, count);
  return t.record(std::move(out), {x}, [x, begin, count](Tape& tp, Var, const Tensor& g) {
    const Tensor& xv = tp.value(x);
    Tensor dx(xv.shape());
    const std::size_t n = xv.cols();
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t j = 0; j < count; ++j) dx[r * n + begin + j] = g[r * count + j];
    tp.accumulate(x, dx);
  });
}

Var slice_rows(Tape& t, Var x, std::size_t begin, std::size_t count) {
  Tensor out = ops::slice_rows(t.value(x), begin, count);
  return t.record(std::move(out), {x}, [x, begin](Tape& tp, Var, const Tensor& g) {
    Tensor dx(tp.value(x).shape());
    std::copy(g.data().begin(), g.data().end(), dx.data().begin() + static_cast<std::ptrdiff_t>(begin * dx.cols()));
    tp.accumulate(x, dx);
  });
}

Var group_mean_rows(Tape& t, Var x, std::size_t group) {
  Tensor out = ops::group_mean_rows(t.value(x), group);
  return t.record(std::move(out), {x}, [x, group](Tape& tp, Var, const Tensor& g) {
    tp.accumulate(x, ops::group_mean_rows_backward(g, group));
  });
}

Var mean_rows(Tape& t, Var x) {
  const Tensor& v = t.value(x);
  if (v.rank() != 2) throw ShapeError("mean_rows: expected rank 2, got " + shape_str(v.shape()));
  const std::size_t d = v.dim(1);
  Var m = group_mean_rows(t, x, v.dim(0));
  return reshape(t, m, {d});
}

Var conv1d_temporal(Tape& t, Var x, Var kernel, Var bias) {
  Tensor out = ops::conv1d_temporal(t.value(x), t.value(kernel), t.value(bias));
  return t.record(std::move(out), {x, kernel, bias}, [x, kernel, bias](Tape& tp, Var, const Tensor& g) {
    auto grads = ops::conv1d_temporal_backward(tp.value(x), tp.value(kernel), g);
    tp.accumulate(x, grads.dx);
    tp.accumulate(kernel, grads.dkernel);
    tp.accumulate(bias, grads.dbias.reshaped(tp.value(bias).shape()));
  });
}

Var avg_pool_grid(Tape& t, Var frames, std::size_t grid) {
  Tensor out = ops::avg_pool_grid(t.value(frames), grid);
  return t.record(std::move(out), {frames}, [frames, grid](Tape& tp, Var, const Tensor& g) {
    tp.accumulate(frames, ops::avg_pool_grid_backward(tp.value(frames).shape(), grid, g));
  });
}

Var sum(Tape& t, Var x) {
  double s = 0.0;
  for (double v : t.value(x).data()) s += v;
  return t.record(Tensor::scalar(s), {x}, [x](Tape& tp, Var, const Tensor& g) {
    tp.accumulate(x, Tensor(tp.value(x).shape(), g.item()));
  });
}

Var reshape(Tape& t, Var x, Shape shape) {
  Tensor out = t.value(x).reshaped(std::move(shape));
  return t.record(std::move(out), {x}, [x](Tape& tp, Var, const Tensor& g) {
    tp.accumulate(x, g.reshaped(tp.value(x).shape()));
  });
}

Var stack_scalars(Tape& t, std::span<const Var> xs) {
  std::vector<double> vals;
  vals.reserve(xs.size());
  for (Var v : xs) vals.push_back(t.value(v).item());
  std::vector<Var> inputs(xs.begin(), xs.end());
  return t.record(Tensor::vector(std::move(vals)), inputs, [inputs](Tape& tp, Var, const Tensor& g) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      tp.accumulate(inputs[i], Tensor(tp.value(inputs[i]).shape(), g[i]));
    }
  });
}

}  // namespace exq::ag
