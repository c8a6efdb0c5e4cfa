#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "exq/ops.hpp"
#include "exq/tape.hpp"

/// Differentiable versions of the kernels in exq::ops, recorded on a Tape.
namespace exq::ag {

Var matmul(Tape& t, Var a, Var b);
Var transpose(Tape& t, Var a);
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
Var hadamard(Tape& t, Var a, Var b);
Var softmax_lastaxis(Tape& t, Var x);
Var layer_norm(Tape& t, Var x, Var gain, Var bias, double eps = ops::kLayerNormEps);
Var linear(Tape& t, Var x, Var w, Var b);
Var relu(Tape& t, Var x);
Var concat_lastaxis(Tape& t, Var a, Var b);
Var concat_lastaxis(Tape& t, const std::vector<Var>& parts);
Var slice_lastaxis(Tape& t, Var x, std::size_t begin, std::size_t count);
Var slice_rows(Tape& t, Var x, std::size_t begin, std::size_t count);
Var group_mean_rows(Tape& t, Var x, std::size_t group);
Var mean_rows(Tape& t, Var x);
Var conv1d_temporal(Tape& t, Var x, Var kernel, Var bias);
Var avg_pool_grid(Tape& t, Var frames, std::size_t grid);
Var sum(Tape& t, Var x);
Var reshape(Tape& t, Var x, Shape shape);

/// Collects single-element nodes into one [n] vector.
Var stack_scalars(Tape& t, std::span<const Var> xs);

}  // namespace exq::ag
