#pragma once

#include <cstddef>
#include <utility>

#include "exq/tensor.hpp"

/// Forward kernels and their hand-written backward rules.
///
/// Every tensor argument is interpreted as a batch of row vectors along its
/// trailing axis unless stated otherwise. Backward functions take the
/// forward inputs (or outputs, where cheaper) plus the upstream gradient.
namespace exq::ops {

// Matrix product of rank-2 tensors. Summation over the inner axis runs in
// ascending index order for every output element.
Tensor matmul(const Tensor& a, const Tensor& b);
struct MatmulGrads {
  Tensor da, db;
};
MatmulGrads matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dc);

Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);

Tensor softmax_lastaxis(const Tensor& x);
/// Takes the softmax OUTPUT y.
Tensor softmax_backward(const Tensor& y, const Tensor& dy);

inline constexpr double kLayerNormEps = 1e-5;

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = kLayerNormEps);
struct LayerNormGrads {
  Tensor dx, dgain, dbias;
};
LayerNormGrads layer_norm_backward(const Tensor& x, const Tensor& gain, const Tensor& dy,
                                   double eps = kLayerNormEps);

/// x[...×din] · w[din×dout] + b[dout].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);
struct LinearGrads {
  Tensor dx, dw, db;
};
LinearGrads linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, bool need_dx = true);

Tensor relu(const Tensor& x);
/// Gradient passes where x > 0; zero at and below zero.
Tensor relu_backward(const Tensor& x, const Tensor& dy);

Tensor concat_lastaxis(const Tensor& a, const Tensor& b);
std::pair<Tensor, Tensor> split_lastaxis(const Tensor& x, std::size_t p);
/// Columns [begin, begin + count) of the trailing axis.
Tensor slice_lastaxis(const Tensor& x, std::size_t begin, std::size_t count);
/// Rows [begin, begin + count) of a rank-2 tensor.
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);

/// Means over consecutive groups of `group` rows: [g·m × d] -> [m × d].
Tensor group_mean_rows(const Tensor& x, std::size_t group);
Tensor group_mean_rows_backward(const Tensor& dy, std::size_t group);

/// Temporal cross-correlation with zero "same" padding.
/// x: [n×d], kernel: [k×d×dout], bias: [dout] -> [n×dout]; k must be odd.
Tensor conv1d_temporal(const Tensor& x, const Tensor& kernel, const Tensor& bias);
struct Conv1dGrads {
  Tensor dx, dkernel, dbias;
};
Conv1dGrads conv1d_temporal_backward(const Tensor& x, const Tensor& kernel, const Tensor& dy);

/// Spatial average pooling of a [F×C×H×W] stack onto a g×g patch grid,
/// flattened to [F × C·g·g]. H and W must be divisible by g.
Tensor avg_pool_grid(const Tensor& frames, std::size_t grid);
Tensor avg_pool_grid_backward(const Shape& input_shape, std::size_t grid, const Tensor& dy);

}  // namespace exq::ops
