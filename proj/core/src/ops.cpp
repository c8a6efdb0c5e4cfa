#include "exq/ops.hpp"

#include <algorithm>
#include <cmath>

#include "exq/error.hpp"

namespace exq::ops {
namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + shape_str(t.shape()));
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

Shape with_last(const Shape& s, std::size_t last) {
  Shape out = s;
  out.back() = last;
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner extents differ, " + shape_str(a.shape()) + " · " + shape_str(b.shape()));
  }
  Tensor c({m, p});
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* C = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = C + i * p;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = A[i * k + kk];
      const double* brow = B + kk * p;
      for (std::size_t j = 0; j < p; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

MatmulGrads matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dc) {
  const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(1);
  if (dc.shape() != Shape{m, p}) throw ShapeError("matmul_backward: upstream gradient " + shape_str(dc.shape()));
  MatmulGrads g{Tensor({m, k}), Tensor({k, p})};
  const double* A = a.data().data();
  const double* B = b.data().data();
  const double* G = dc.data().data();
  double* dA = g.da.data().data();
  double* dB = g.db.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      double s = 0.0;
      const double* brow = B + kk * p;
      const double* grow = G + i * p;
      for (std::size_t j = 0; j < p; ++j) s += grow[j] * brow[j];
      dA[i * k + kk] = s;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = G + i * p;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = A[i * k + kk];
      double* drow = dB + kk * p;
      for (std::size_t j = 0; j < p; ++j) drow[j] += av * grow[j];
    }
  }
  return g;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t r = a.dim(0), c = a.dim(1);
  Tensor t({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same(a, b, "hadamard");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor softmax_lastaxis(const Tensor& x) {
  const std::size_t n = x.cols();
  if (n == 0) throw ShapeError("softmax_lastaxis: empty trailing axis");
  Tensor y(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* in = x.data().data() + r * n;
    double* out = y.data().data() + r * n;
    const double mx = *std::max_element(in, in + n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = std::exp(in[j] - mx);
      sum += out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= sum;
  }
  return y;
}

Tensor softmax_backward(const Tensor& y, const Tensor& dy) {
  require_same(y, dy, "softmax_backward");
  const std::size_t n = y.cols();
  Tensor dx(y.shape());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    const std::size_t off = r * n;
    double dot = 0.0;
    for (std::size_t j = 0; j < n; ++j) dot += y[off + j] * dy[off + j];
    for (std::size_t j = 0; j < n; ++j) dx[off + j] = y[off + j] * (dy[off + j] - dot);
  }
  return dx;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const std::size_t d = x.cols();
  if (gain.size() != d || bias.size() != d) {
    throw ShapeError("layer_norm: affine parameters of size " + std::to_string(gain.size()) + " for width " +
                     std::to_string(d));
  }
  Tensor y(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* in = x.data().data() + r * d;
    double* out = y.data().data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += in[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) out[j] = (in[j] - mean) * rstd * gain[j] + bias[j];
  }
  return y;
}

LayerNormGrads layer_norm_backward(const Tensor& x, const Tensor& gain, const Tensor& dy, double eps) {
  require_same(x, dy, "layer_norm_backward");
  const std::size_t d = x.cols();
  LayerNormGrads g{Tensor(x.shape()), Tensor({d}), Tensor({d})};
  std::vector<double> xhat(d), dxhat(d);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* in = x.data().data() + r * d;
    const double* up = dy.data().data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += in[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + eps);
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      xhat[j] = (in[j] - mean) * rstd;
      dxhat[j] = up[j] * gain[j];
      mean_dxhat += dxhat[j];
      mean_dxhat_xhat += dxhat[j] * xhat[j];
      g.dgain[j] += up[j] * xhat[j];
      g.dbias[j] += up[j];
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_xhat /= static_cast<double>(d);
    double* out = g.dx.data().data() + r * d;
    for (std::size_t j = 0; j < d; ++j) out[j] = rstd * (dxhat[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
  }
  return g;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank(w, 2, "linear");
  const std::size_t din = w.dim(0), dout = w.dim(1);
  if (x.rank() == 0 || x.cols() != din) {
    throw ShapeError("linear: input " + shape_str(x.shape()) + " does not end in " + std::to_string(din));
  }
  if (b.size() != dout) throw ShapeError("linear: bias of size " + std::to_string(b.size()) + " for width " + std::to_string(dout));
  const std::size_t rows = x.rows();
  Tensor y(with_last(x.shape(), dout));
  const double* X = x.data().data();
  const double* W = w.data().data();
  double* Y = y.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    double* yrow = Y + r * dout;
    for (std::size_t k = 0; k < din; ++k) {
      const double xv = X[r * din + k];
      const double* wrow = W + k * dout;
      for (std::size_t j = 0; j < dout; ++j) yrow[j] += xv * wrow[j];
    }
    for (std::size_t j = 0; j < dout; ++j) yrow[j] += b[j];
  }
  return y;
}

LinearGrads linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, bool need_dx) {
  const std::size_t din = w.dim(0), dout = w.dim(1);
  const std::size_t rows = x.rows();
  if (dy.shape() != with_last(x.shape(), dout)) throw ShapeError("linear_backward: upstream gradient " + shape_str(dy.shape()));
  LinearGrads g{need_dx ? Tensor(x.shape()) : Tensor(), Tensor({din, dout}), Tensor({dout})};
  const double* X = x.data().data();
  const double* W = w.data().data();
  const double* G = dy.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* grow = G + r * dout;
    if (need_dx) {
      double* dxrow = g.dx.data().data() + r * din;
      for (std::size_t k = 0; k < din; ++k) {
        const double* wrow = W + k * dout;
        double s = 0.0;
        for (std::size_t j = 0; j < dout; ++j) s += grow[j] * wrow[j];
        dxrow[k] = s;
      }
    }
    for (std::size_t k = 0; k < din; ++k) {
      const double xv = X[r * din + k];
      double* dwrow = g.dw.data().data() + k * dout;
      for (std::size_t j = 0; j < dout; ++j) dwrow[j] += xv * grow[j];
    }
    for (std::size_t j = 0; j < dout; ++j) g.db[j] += grow[j];
  }
  return g;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& dy) {
  require_same(x, dy, "relu_backward");
  Tensor dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
  return dx;
}

Tensor concat_lastaxis(const Tensor& a, const Tensor& b) {
  if (a.rank() == 0 || a.rank() != b.rank() ||
      !std::equal(a.shape().begin(), a.shape().end() - 1, b.shape().begin())) {
    throw ShapeError("concat_lastaxis: leading axes differ, " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t p = a.cols(), q = b.cols();
  const std::size_t rows = p ? a.rows() : (q ? b.rows() : 0);
  Tensor out(with_last(a.shape(), p + q));
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(a.data().data() + r * p, p, out.data().data() + r * (p + q));
    std::copy_n(b.data().data() + r * q, q, out.data().data() + r * (p + q) + p);
  }
  return out;
}

std::pair<Tensor, Tensor> split_lastaxis(const Tensor& x, std::size_t p) {
  if (x.rank() == 0 || p > x.cols()) throw ShapeError("split_lastaxis: cannot split " + shape_str(x.shape()) + " at " + std::to_string(p));
  return {slice_lastaxis(x, 0, p), slice_lastaxis(x, p, x.cols() - p)};
}

Tensor slice_lastaxis(const Tensor& x, std::size_t begin, std::size_t count) {
  const std::size_t n = x.cols();
  if (x.rank() == 0 || begin + count > n) {
    throw ShapeError("slice_lastaxis: range [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                     ") outside " + shape_str(x.shape()));
  }
  Tensor out(with_last(x.shape(), count));
  const std::size_t rows = shape_numel(Shape(x.shape().begin(), x.shape().end() - 1));
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(x.data().data() + r * n + begin, count, out.data().data() + r * count);
  }
  return out;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  require_rank(x, 2, "slice_rows");
  if (begin + count > x.dim(0)) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                     ") outside " + shape_str(x.shape()));
  }
  const std::size_t d = x.dim(1);
  Tensor out({count, d});
  std::copy_n(x.data().data() + begin * d, count * d, out.data().data());
  return out;
}

Tensor group_mean_rows(const Tensor& x, std::size_t group) {
  require_rank(x, 2, "group_mean_rows");
  if (group == 0 || x.dim(0) % group != 0) {
    throw ShapeError("group_mean_rows: " + std::to_string(x.dim(0)) + " rows not divisible by " + std::to_string(group));
  }
  const std::size_t m = x.dim(0) / group, d = x.dim(1);
  Tensor out({m, d});
  for (std::size_t g = 0; g < m; ++g) {
    double* orow = out.data().data() + g * d;
    for (std::size_t r = 0; r < group; ++r) {
      const double* irow = x.data().data() + (g * group + r) * d;
      for (std::size_t j = 0; j < d; ++j) orow[j] += irow[j];
    }
    for (std::size_t j = 0; j < d; ++j) orow[j] /= static_cast<double>(group);
  }
  return out;
}

Tensor group_mean_rows_backward(const Tensor& dy, std::size_t group) {
  const std::size_t m = dy.dim(0), d = dy.dim(1);
  Tensor dx({m * group, d});
  for (std::size_t g = 0; g < m; ++g)
    for (std::size_t r = 0; r < group; ++r)
      for (std::size_t j = 0; j < d; ++j) dx.at(g * group + r, j) = dy.at(g, j) / static_cast<double>(group);
  return dx;
}

Tensor conv1d_temporal(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
  require_rank(x, 2, "conv1d_temporal");
  require_rank(kernel, 3, "conv1d_temporal");
  const std::size_t n = x.dim(0), d = x.dim(1);
  const std::size_t k = kernel.dim(0), dout = kernel.dim(2);
  if (k % 2 == 0) throw ShapeError("conv1d_temporal: kernel size must be odd, got " + std::to_string(k));
  if (kernel.dim(1) != d) throw ShapeError("conv1d_temporal: kernel " + shape_str(kernel.shape()) + " for input " + shape_str(x.shape()));
  if (bias.size() != dout) throw ShapeError("conv1d_temporal: bias size " + std::to_string(bias.size()));
  const auto c = static_cast<std::ptrdiff_t>(k / 2);
  Tensor y({n, dout});
  for (std::size_t t = 0; t < n; ++t) {
    double* yrow = y.data().data() + t * dout;
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(j) - c;
      if (s < 0 || s >= static_cast<std::ptrdiff_t>(n)) continue;
      const double* xrow = x.data().data() + static_cast<std::size_t>(s) * d;
      const double* kj = kernel.data().data() + j * d * dout;
      for (std::size_t ci = 0; ci < d; ++ci) {
        const double xv = xrow[ci];
        const double* krow = kj + ci * dout;
        for (std::size_t o = 0; o < dout; ++o) yrow[o] += xv * krow[o];
      }
    }
    for (std::size_t o = 0; o < dout; ++o) yrow[o] += bias[o];
  }
  return y;
}

Conv1dGrads conv1d_temporal_backward(const Tensor& x, const Tensor& kernel, const Tensor& dy) {
  const std::size_t n = x.dim(0), d = x.dim(1);
  const std::size_t k = kernel.dim(0), dout = kernel.dim(2);
  if (dy.shape() != Shape{n, dout}) throw ShapeError("conv1d_temporal_backward: upstream gradient " + shape_str(dy.shape()));
  const auto c = static_cast<std::ptrdiff_t>(k / 2);
  Conv1dGrads g{Tensor(x.shape()), Tensor(kernel.shape()), Tensor({dout})};
  for (std::size_t t = 0; t < n; ++t) {
    const double* grow = dy.data().data() + t * dout;
    for (std::size_t o = 0; o < dout; ++o) g.dbias[o] += grow[o];
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(j) - c;
      if (s < 0 || s >= static_cast<std::ptrdiff_t>(n)) continue;
      const double* xrow = x.data().data() + static_cast<std::size_t>(s) * d;
      double* dxrow = g.dx.data().data() + static_cast<std::size_t>(s) * d;
      const double* kj = kernel.data().data() + j * d * dout;
      double* dkj = g.dkernel.data().data() + j * d * dout;
      for (std::size_t ci = 0; ci < d; ++ci) {
        const double* krow = kj + ci * dout;
        double* dkrow = dkj + ci * dout;
        const double xv = xrow[ci];
        double acc = 0.0;
        for (std::size_t o = 0; o < dout; ++o) {
          acc += grow[o] * krow[o];
          dkrow[o] += xv * grow[o];
        }
        dxrow[ci] += acc;
      }
    }
  }
  return g;
}

Tensor avg_pool_grid(const Tensor& frames, std::size_t grid) {
  require_rank(frames, 4, "avg_pool_grid");
  const std::size_t f = frames.dim(0), ch = frames.dim(1), h = frames.dim(2), w = frames.dim(3);
  if (grid == 0 || h % grid != 0 || w % grid != 0) {
    throw ShapeError("avg_pool_grid: " + shape_str(frames.shape()) + " not divisible into a " + std::to_string(grid) +
                     "x" + std::to_string(grid) + " grid");
  }
  const std::size_t bh = h / grid, bw = w / grid;
  const double inv = 1.0 / static_cast<double>(bh * bw);
  Tensor out({f, ch * grid * grid});
  const double* in = frames.data().data();
  for (std::size_t fi = 0; fi < f; ++fi) {
    for (std::size_t c = 0; c < ch; ++c) {
      const double* plane = in + (fi * ch + c) * h * w;
      double* o = out.data().data() + fi * ch * grid * grid + c * grid * grid;
      for (std::size_t y = 0; y < h; ++y) {
        double* orow = o + (y / bh) * grid;
        const double* src = plane + y * w;
        for (std::size_t gx = 0; gx < grid; ++gx, src += bw)
          for (std::size_t x = 0; x < bw; ++x) orow[gx] += src[x];
      }
      for (std::size_t i = 0; i < grid * grid; ++i) o[i] *= inv;
    }
  }
  return out;
}

Tensor avg_pool_grid_backward(const Shape& input_shape, std::size_t grid, const Tensor& dy) {
  const std::size_t f = input_shape.at(0), ch = input_shape.at(1), h = input_shape.at(2), w = input_shape.at(3);
  const std::size_t bh = h / grid, bw = w / grid;
  const double inv = 1.0 / static_cast<double>(bh * bw);
  Tensor dx(input_shape);
  for (std::size_t fi = 0; fi < f; ++fi)
    for (std::size_t c = 0; c < ch; ++c) {
      const double* g = dy.data().data() + fi * ch * grid * grid + c * grid * grid;
      double* plane = dx.data().data() + (fi * ch + c) * h * w;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) plane[y * w + x] = g[(y / bh) * grid + x / bw] * inv;
    }
  return dx;
}

}  // namespace exq::ops
