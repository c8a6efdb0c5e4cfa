#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "exq/optim.hpp"
#include "exq/tape.hpp"

namespace exq {

/// Builds a scalar-valued computation on the given tape.
using ScalarFn = std::function<Var(Tape&)>;

/// Compares the tape gradient of `f` with respect to `p` against central
/// finite differences. Returns the largest per-coordinate relative error
/// |analytic - numeric| / (|analytic| + |numeric| + eps).
///
/// `p.value` is restored bit-exactly; `p.grad` is left holding the analytic
/// gradient.
double grad_check(const ScalarFn& f, Param& p, double h = 1e-5, double eps = 1e-10);

/// As above, restricted to the listed flat coordinates of `p`.
double grad_check(const ScalarFn& f, Param& p, std::span<const std::size_t> coords, double h = 1e-5,
                  double eps = 1e-10);

/// Variant for piecewise-smooth functions such as ReLU networks. A probe
/// whose central differences at h and h/2 disagree straddles a kink; it is
/// retried with steps h/10 down to h/10^4 and the first self-consistent estimate
/// is used. A probe that never settles keeps its step-h estimate.
double grad_check_piecewise(const ScalarFn& f, Param& p, std::span<const std::size_t> coords, double h = 1e-5,
                            double eps = 1e-10);

/// Largest grad_check error over a list of parameters.
double grad_check(const ScalarFn& f, const ParamList& params, double h = 1e-5, double eps = 1e-10);

struct GradCheckResult {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool composed = false;
  bool pass() const { return error < tolerance; }
};

/// Every differentiable primitive on random small shapes (tolerance 1e-6),
/// then a cross-fusion block and a tiny end-to-end pipeline with the BMC
/// loss (tolerance 1e-4). Large head matrices are checked on a random
/// sample of coordinates.
std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed);

}  // namespace exq
