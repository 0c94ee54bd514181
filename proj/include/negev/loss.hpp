#pragma once

#include "negev/evidence.hpp"
#include "negev/tensor.hpp"

namespace negev {

enum class Reduction { Mean, Sum };

/// Two-channel softmax maps: channel 0 is background, channel 1 foreground.
/// Channels sum to 1 at every pixel.
struct SoftmaxMaps {
  Tensor maps;  // [2,H,W]

  int height() const { return maps.dim(1); }
  int width() const { return maps.dim(2); }
  std::size_t pixels() const { return static_cast<std::size_t>(height()) * width(); }
  double background_at(std::size_t p) const { return maps[p]; }
  double foreground_at(std::size_t p) const { return maps[pixels() + p]; }

  void validate() const;
};

struct LossConfig {
  double lambda = 1.0;            // weight on the evidence term
  int n = 1;                      // pixels sampled per region
  SamplingMode mode = SamplingMode::Random;
  double prob_clamp = 1e-8;       // probabilities clamped to [eps, 1-eps] before log
  Reduction negative_term_reduction = Reduction::Mean;
  // Keeps the cross-entropy orientation exactly as printed in the source
  // formula, where the background label rewards foreground probability.
  // Off by default; the corrected orientation is the working one.
  bool paper_literal = false;

  void validate() const;
};

enum class LossBranch { Evidence, FullyNegative };

/// One sample's loss with its active branch. Exactly one of the two term
/// fields is nonzero; `total` is the differentiable scalar.
struct LossValue {
  Tensor total;
  double evidence_term = 0.0;
  double negative_term = 0.0;
  LossBranch branch = LossBranch::Evidence;
};

/// Binary cross-entropy of one pixel given its (S0, S1) pair, with both
/// probabilities clamped to [eps, 1-eps] before the log. Corrected
/// orientation: -(1-y)*log(S0) - y*log(S1). Literal orientation:
/// -(1-y)*log(1-S0) - y*log(S1).
double pixel_bce(int label, double s0, double s1, double eps = 1e-8,
                 bool paper_literal = false);

/// Sum of pixel_bce over labeled pixels only. Unknown pixels contribute
/// exactly zero loss and zero gradient. Throws StateError when the mask has
/// no labeled pixel.
Tensor partial_ce(const SoftmaxMaps& maps, const PseudoMask& mask,
                  const LossConfig& cfg);

/// Background pressure over the whole pixel domain: aggregate of
/// -log(S0_p) (corrected) resp. -log(1-S0_p) (literal), mean by default.
Tensor negative_sample_loss(const SoftmaxMaps& maps, const LossConfig& cfg);

/// The indicator-gated composite: fully negative samples take the
/// background term alone, all other samples take lambda * partial_ce alone.
LossValue total_loss(const SoftmaxMaps& maps, const PseudoMask& mask,
                     bool fully_negative, const LossConfig& cfg);

/// Dense supervision baseline: mean pixel_bce against a fully labeled mask.
Tensor full_mask_bce(const SoftmaxMaps& maps, const PseudoMask& mask,
                     double eps = 1e-8);

}  // namespace negev
