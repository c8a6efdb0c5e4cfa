#include "exq/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "exq/error.hpp"

namespace exq {
namespace {

double evaluate(const ScalarFn& f) {
  Tape t;
  return t.value(f(t)).item();
}

double central(const ScalarFn& f, Param& p, std::size_t i, double h) {
  const double orig = p.value[i];
  p.value[i] = orig + h;
  const double up = evaluate(f);
  p.value[i] = orig - h;
  const double down = evaluate(f);
  p.value[i] = orig;
  return (up - down) / (2.0 * h);
}

double settled(const ScalarFn& f, Param& p, std::size_t i, double h) {
  const double first = central(f, p, i, h);
  double step = h;
  for (int k = 0; k <= 4; ++k, step /= 10.0) {
    const double a = step == h ? first : central(f, p, i, step);
    const double b = central(f, p, i, step / 2.0);
    if (std::abs(a - b) <= 1e-9 + 1e-6 * std::abs(a)) return a;
  }
  return first;
}

template <class Numeric>
double check_coords(const ScalarFn& f, Param& p, std::span<const std::size_t> coords, double eps, Numeric numeric_at) {
  p.zero_grad();
  {
    Tape t;
    Var out = f(t);
    t.backward(out);
  }
  const Tensor analytic = p.grad;
  double worst = 0.0;
  for (std::size_t i : coords) {
    if (i >= p.value.size()) throw ShapeError("grad_check: coordinate " + std::to_string(i) + " out of range");
    const double numeric = numeric_at(i);
    const double err = std::abs(analytic[i] - numeric) / (std::abs(analytic[i]) + std::abs(numeric) + eps);
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

double grad_check(const ScalarFn& f, Param& p, double h, double eps) {
  std::vector<std::size_t> all(p.value.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return grad_check(f, p, all, h, eps);
}

double grad_check(const ScalarFn& f, Param& p, std::span<const std::size_t> coords, double h, double eps) {
  return check_coords(f, p, coords, eps, [&](std::size_t i) { return central(f, p, i, h); });
}

double grad_check_piecewise(const ScalarFn& f, Param& p, std::span<const std::size_t> coords, double h, double eps) {
  return check_coords(f, p, coords, eps, [&](std::size_t i) { return settled(f, p, i, h); });
}

double grad_check(const ScalarFn& f, const ParamList& params, double h, double eps) {
  double worst = 0.0;
  for (const auto& np : params) worst = std::max(worst, grad_check(f, *np.param, h, eps));
  return worst;
}

}  // namespace exq
