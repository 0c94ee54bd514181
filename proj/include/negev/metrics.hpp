#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "negev/errors.hpp"

namespace negev {

/// One evaluation item: a score map in [0,1] and its binary ground truth.
struct EvalPair {
  int height = 0;
  int width = 0;
  std::vector<double> scores;
  std::vector<std::uint8_t> mask;  // strictly 0/1

  void validate() const;
};

/// Threshold sweep result. `pxap` is in [0,100] (percent).
struct PxapReport {
  std::vector<double> thresholds;
  std::vector<double> precision;
  std::vector<double> recall;
  double pxap = 0.0;
};

/// The fixed sweep 0.000, 0.001, ..., 1.000 (1001 points).
const std::vector<double>& pxap_threshold_grid();

/// Pooled pixel precision/recall at a single threshold. A pixel is
/// predicted positive iff score >= t. Precision is 1 when nothing is
/// predicted. Throws ProtocolError when the pool has no positive pixels.
std::pair<double, double> pr_at_threshold(std::span<const EvalPair> pairs, double t);

/// Area under the pooled pixel precision-recall curve over the fixed grid,
/// as a percentage. AP = sum_i (R_i - R_{i+1}) * P_i with a virtual R=0
/// endpoint past the last threshold.
PxapReport pxap(std::span<const EvalPair> pairs);

/// Mean of per-image PxAP values; images without positive ground-truth
/// pixels are skipped. Comparison variant, not the headline protocol.
double pxap_per_image_mean(std::span<const EvalPair> pairs);

/// 100 * fraction of exact matches.
double classification_accuracy(std::span<const int> predictions,
                               std::span<const int> labels);

/// Writes "threshold,precision,recall" rows plus a trailing summary line.
void write_pr_csv(const std::filesystem::path& path, const PxapReport& report,
                  double classification_accuracy_percent);

}  // namespace negev
