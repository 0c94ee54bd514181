#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "negev/cam.hpp"
#include "negev/rng.hpp"

namespace negev {

enum class SamplingMode { Random, Static };

/// Sampled pixel pseudo-labels: `positive` pixels are treated as foreground,
/// `negative` pixels as background. The two sets are always disjoint and,
/// given the n <= |Omega|/2 precondition, both hold exactly n pixels.
struct EvidenceSet {
  std::vector<int> positive;
  std::vector<int> negative;
  int n = 0;
  SamplingMode mode = SamplingMode::Random;
};

/// Sparse pixel labels: 1 on sampled foreground, 0 on sampled background,
/// kUnknown everywhere else.
struct PseudoMask {
  static constexpr std::int8_t kUnknown = -1;

  int height = 0;
  int width = 0;
  std::vector<std::int8_t> labels;

  std::size_t labeled_count() const;
};

/// Draws n foreground pixels with probability proportional to the CAM value
/// and n background pixels (disjoint from the foreground set) proportional
/// to 1 - CAM, both without replacement. Static mode instead takes the
/// top-n / bottom-n pixels by activation, ties broken by row-major index,
/// and consumes no randomness. Degenerate (all-zero) weight vectors fall
/// back to uniform sampling.
EvidenceSet sample_evidence(const Cam& cam, int n, SamplingMode mode, RngStream& rng);

PseudoMask build_pseudo_mask(const EvidenceSet& evidence, int height, int width);

/// A stream that is a pure function of (global_seed, image_id, epoch), so a
/// resumed run replays the exact same pixel draws.
RngStream resample_schedule(std::uint64_t global_seed, std::string_view image_id,
                            std::uint64_t epoch);

}  // namespace negev
