#include "negev/loss.hpp"

#include <cmath>

#include "negev/ops.hpp"

namespace negev {
namespace {

using detail::attach_backward;
using detail::TensorNode;

double clamp_prob(double p, double eps) {
  if (p < eps) return eps;
  if (p > 1.0 - eps) return 1.0 - eps;
  return p;
}

// d/dp of log(clamp(p)); zero outside the clamp interval.
double dlog_clamped(double p, double eps) {
  if (p < eps || p > 1.0 - eps) return 0.0;
  return 1.0 / p;
}

}  // namespace

void SoftmaxMaps::validate() const {
  if (maps.rank() != 3 || maps.dim(0) != 2)
    throw DimensionError("SoftmaxMaps: expected [2,H,W]");
  const std::size_t n = pixels();
  for (std::size_t p = 0; p < n; ++p)
    if (std::fabs(maps[p] + maps[n + p] - 1.0) > 1e-6)
      throw NumericError("SoftmaxMaps: channels do not sum to 1 at pixel " +
                         std::to_string(p));
}

void LossConfig::validate() const {
  if (lambda < 0.0) throw ConfigError("LossConfig: lambda must be non-negative");
  if (!(prob_clamp > 0.0 && prob_clamp < 0.5))
    throw ConfigError("LossConfig: prob_clamp must lie in (0, 0.5)");
  if (n < 1) throw ConfigError("LossConfig: n must be >= 1");
}

double pixel_bce(int label, double s0, double s1, double eps, bool paper_literal) {
  if (paper_literal)
    return -(1.0 - label) * std::log(clamp_prob(1.0 - s0, eps)) -
           label * std::log(clamp_prob(s1, eps));
  return -(1.0 - label) * std::log(clamp_prob(s0, eps)) -
         label * std::log(clamp_prob(s1, eps));
}

Tensor partial_ce(const SoftmaxMaps& maps, const PseudoMask& mask,
                  const LossConfig& cfg) {
  cfg.validate();
  const std::size_t n = maps.pixels();
  if (mask.labels.size() != n || mask.height != maps.height() ||
      mask.width != maps.width())
    throw DimensionError("partial_ce: mask dims do not match maps");
  if (mask.labeled_count() == 0)
    throw StateError("partial_ce: mask has no labeled pixel");

  const double eps = cfg.prob_clamp;
  const bool literal = cfg.paper_literal;
  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const std::int8_t l = mask.labels[p];
    if (l == PseudoMask::kUnknown) continue;
    sum += pixel_bce(l, maps.background_at(p), maps.foreground_at(p), eps, literal);
  }
  Tensor out = Tensor::scalar(sum);

  auto s_n = maps.maps.shared_node();
  auto labels = std::make_shared<std::vector<std::int8_t>>(mask.labels);
  TensorNode* out_n = out.node();
  attach_backward(out, {maps.maps}, [=]() {
    if (!s_n->needs_grad) return;
    s_n->ensure_grad();
    const double g = out_n->grad[0];
    for (std::size_t p = 0; p < n; ++p) {
      const std::int8_t l = (*labels)[p];
      if (l == PseudoMask::kUnknown) continue;
      const double s0 = s_n->values[p];
      const double s1 = s_n->values[n + p];
      if (l == 1) {
        s_n->grad[n + p] += g * -dlog_clamped(s1, eps);
      } else if (literal) {
        // -log(1 - s0): d/ds0 = +1/(1-s0) inside the clamp window.
        const double q = 1.0 - s0;
        if (q >= eps && q <= 1.0 - eps) s_n->grad[p] += g / q;
      } else {
        s_n->grad[p] += g * -dlog_clamped(s0, eps);
      }
    }
  });
  return out;
}

Tensor negative_sample_loss(const SoftmaxMaps& maps, const LossConfig& cfg) {
  cfg.validate();
  const std::size_t n = maps.pixels();
  const double eps = cfg.prob_clamp;
  const bool literal = cfg.paper_literal;
  const double norm =
      cfg.negative_term_reduction == Reduction::Mean ? 1.0 / static_cast<double>(n) : 1.0;

  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double s0 = maps.background_at(p);
    sum += literal ? -std::log(clamp_prob(1.0 - s0, eps))
                   : -std::log(clamp_prob(s0, eps));
  }
  Tensor out = Tensor::scalar(sum * norm);

  auto s_n = maps.maps.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {maps.maps}, [=]() {
    if (!s_n->needs_grad) return;
    s_n->ensure_grad();
    const double g = out_n->grad[0] * norm;
    for (std::size_t p = 0; p < n; ++p) {
      const double s0 = s_n->values[p];
      if (literal) {
        const double q = 1.0 - s0;
        if (q >= eps && q <= 1.0 - eps) s_n->grad[p] += g / q;
      } else {
        s_n->grad[p] += g * -dlog_clamped(s0, eps);
      }
    }
  });
  return out;
}

LossValue total_loss(const SoftmaxMaps& maps, const PseudoMask& mask,
                     bool fully_negative, const LossConfig& cfg) {
  LossValue value;
  if (fully_negative) {
    value.branch = LossBranch::FullyNegative;
    value.total = negative_sample_loss(maps, cfg);
    value.negative_term = value.total.item();
  } else {
    value.branch = LossBranch::Evidence;
    value.total = scale(partial_ce(maps, mask, cfg), cfg.lambda);
    value.evidence_term = value.total.item();
  }
  if (!std::isfinite(value.total.item()))
    throw NumericError("total_loss: non-finite loss value");
  return value;
}

Tensor full_mask_bce(const SoftmaxMaps& maps, const PseudoMask& mask, double eps) {
  const std::size_t n = maps.pixels();
  if (mask.labels.size() != n)
    throw DimensionError("full_mask_bce: mask dims do not match maps");
  for (std::int8_t l : mask.labels)
    if (l == PseudoMask::kUnknown)
      throw StateError("full_mask_bce: mask must label every pixel");
  LossConfig cfg;
  cfg.prob_clamp = eps;
  Tensor sum = partial_ce(maps, mask, cfg);
  return scale(sum, 1.0 / static_cast<double>(n));
}

}  // namespace negev
