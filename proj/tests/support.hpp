#pragma once

// Shared helpers for the unit and acceptance suites: seeded tensor
// generation, gradient comparison against central differences, and the
// independent nested-loop convolution reference.

#include <cmath>
#include <functional>
#include <vector>

#include "negev/ops.hpp"
#include "negev/rng.hpp"
#include "negev/tensor.hpp"

namespace negev::testing {

inline Tensor rand_tensor(std::vector<int> shape, RngStream& rng, double lo = -1.0,
                          double hi = 1.0) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = lo + (hi - lo) * rng.next_unit();
  return Tensor::from_values(std::move(shape), std::move(v));
}

inline bool close_rel(double a, double b, double rel_tol, double abs_tol) {
  const double diff = std::fabs(a - b);
  if (diff <= abs_tol) return true;
  return diff <= rel_tol * std::max(std::fabs(a), std::fabs(b));
}

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst_rel = 0.0;
};

/// Compares reverse-mode gradients of `build` (a graph-scalar factory) at
/// `point` against central finite differences. Coordinates for which `skip`
/// returns true (e.g. kink-adjacent relu inputs) are excluded.
inline GradCheckResult check_gradient(
    const std::function<Tensor(const Tensor&)>& build, const Tensor& point,
    double eps = 1e-6, double rel_tol = 1e-4, double abs_tol = 1e-7,
    const std::function<bool(std::size_t)>& skip = {}) {
  Tensor leaf = point.clone_values();
  leaf.set_requires_grad(true);
  Tensor loss = build(leaf);
  backward(loss);

  Tensor fd = finite_diff_grad(
      [&](const Tensor& t) { return build(t).item(); }, point, eps);

  GradCheckResult r;
  auto analytic = leaf.grad();
  auto numeric = fd.values();
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    if (skip && skip(i)) continue;
    ++r.checked;
    const double a = analytic.empty() ? 0.0 : analytic[i];
    const double n = numeric[i];
    if (!close_rel(a, n, rel_tol, abs_tol)) {
      ++r.failed;
      const double denom = std::max({std::fabs(a), std::fabs(n), 1e-300});
      r.worst_rel = std::max(r.worst_rel, std::fabs(a - n) / denom);
    }
  }
  return r;
}

/// Independent nested-loop convolution: the reference the implementation is
/// checked against. Accumulates bias-first in (ci, kh, kw) order.
inline Tensor conv2d_reference(const Tensor& input, const Tensor& kernel,
                               const Tensor& bias, int stride, int pad) {
  const int ci_n = input.dim(0), ih = input.dim(1), iw = input.dim(2);
  const int co_n = kernel.dim(0), kh_n = kernel.dim(2), kw_n = kernel.dim(3);
  const int oh = (ih + 2 * pad - kh_n) / stride + 1;
  const int ow = (iw + 2 * pad - kw_n) / stride + 1;
  Tensor out = Tensor::zeros({co_n, oh, ow});
  auto in = input.values();
  auto k = kernel.values();
  auto b = bias.values();
  auto y = out.values_mut();
  for (int co = 0; co < co_n; ++co)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = b[static_cast<std::size_t>(co)];
        for (int ci = 0; ci < ci_n; ++ci)
          for (int kh = 0; kh < kh_n; ++kh)
            for (int kw = 0; kw < kw_n; ++kw) {
              const int iy = oy * stride - pad + kh;
              const int ix = ox * stride - pad + kw;
              if (iy < 0 || iy >= ih || ix < 0 || ix >= iw) continue;
              acc += in[(static_cast<std::size_t>(ci) * ih + iy) * iw + ix] *
                     k[((static_cast<std::size_t>(co) * ci_n + ci) * kh_n + kh) * kw_n + kw];
            }
        y[(static_cast<std::size_t>(co) * oh + oy) * ow + ox] = acc;
      }
  return out;
}

}  // namespace negev::testing
