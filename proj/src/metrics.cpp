#include "negev/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace negev {

void EvalPair::validate() const {
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (height <= 0 || width <= 0 || scores.size() != n || mask.size() != n)
    throw DimensionError("EvalPair: score map and mask must share positive dims");
  for (double s : scores)
    if (!(s >= 0.0 && s <= 1.0))
      throw NumericError("EvalPair: scores must lie in [0,1]");
  for (std::uint8_t m : mask)
    if (m > 1) throw DimensionError("EvalPair: mask must be strictly binary");
}

const std::vector<double>& pxap_threshold_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g(1001);
    for (int i = 0; i <= 1000; ++i) g[static_cast<std::size_t>(i)] = i * 0.001;
    g[1000] = 1.0;
    return g;
  }();
  return grid;
}

std::pair<double, double> pr_at_threshold(std::span<const EvalPair> pairs, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("threshold must lie in [0,1]");
  std::uint64_t tp = 0, fp = 0, fn = 0;
  std::uint64_t total_pos = 0;
  for (const EvalPair& p : pairs) {
    p.validate();
    for (std::size_t i = 0; i < p.scores.size(); ++i) {
      const bool pred = p.scores[i] >= t;
      const bool pos = p.mask[i] != 0;
      total_pos += pos;
      if (pred && pos) ++tp;
      else if (pred && !pos) ++fp;
      else if (!pred && pos) ++fn;
    }
  }
  if (total_pos == 0)
    throw ProtocolError("pr_at_threshold: no positive ground-truth pixels in the pool");
  const double precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return {precision, recall};
}

PxapReport pxap(std::span<const EvalPair> pairs) {
  const std::vector<double>& grid = pxap_threshold_grid();
  const std::size_t n_thr = grid.size();

  // For a pixel with score s, bucket[k] counts pixels whose predicted-set
  // membership drops at grid index k: the pixel is predicted positive for
  // all thresholds grid[i] <= s, i.e. for i < k where k = #\{grid <= s\}.
  std::vector<std::uint64_t> drop_pos(n_thr + 1, 0), drop_neg(n_thr + 1, 0);
  std::uint64_t total_pos = 0;
  for (const EvalPair& p : pairs) {
    p.validate();
    for (std::size_t i = 0; i < p.scores.size(); ++i) {
      const auto k = static_cast<std::size_t>(
          std::upper_bound(grid.begin(), grid.end(), p.scores[i]) - grid.begin());
      if (p.mask[i]) {
        ++drop_pos[k];
        ++total_pos;
      } else {
        ++drop_neg[k];
      }
    }
  }
  if (total_pos == 0)
    throw ProtocolError("pxap: no positive ground-truth pixels in the pool");

  PxapReport report;
  report.thresholds = grid;
  report.precision.resize(n_thr);
  report.recall.resize(n_thr);

  // Suffix sums: TP(i) = #positives with k > i.
  std::uint64_t tp = 0, fp = 0;
  std::vector<std::uint64_t> tps(n_thr), fps(n_thr);
  for (std::size_t i = n_thr; i-- > 0;) {
    tp += drop_pos[i + 1];
    fp += drop_neg[i + 1];
    tps[i] = tp;
    fps[i] = fp;
  }
  for (std::size_t i = 0; i < n_thr; ++i) {
    const std::uint64_t denom = tps[i] + fps[i];
    report.precision[i] = denom == 0 ? 1.0 : static_cast<double>(tps[i]) / static_cast<double>(denom);
    report.recall[i] = static_cast<double>(tps[i]) / static_cast<double>(total_pos);
  }

  double ap = 0.0;
  for (std::size_t i = 0; i < n_thr; ++i) {
    const double next_recall = (i + 1 < n_thr) ? report.recall[i + 1] : 0.0;
    ap += (report.recall[i] - next_recall) * report.precision[i];
  }
  report.pxap = 100.0 * ap;
  return report;
}

double pxap_per_image_mean(std::span<const EvalPair> pairs) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (const EvalPair& p : pairs) {
    const bool has_pos = std::any_of(p.mask.begin(), p.mask.end(),
                                     [](std::uint8_t m) { return m != 0; });
    if (!has_pos) continue;
    sum += pxap(std::span<const EvalPair>(&p, 1)).pxap;
    ++counted;
  }
  if (counted == 0)
    throw ProtocolError("pxap_per_image_mean: no image has positive pixels");
  return sum / static_cast<double>(counted);
}

double classification_accuracy(std::span<const int> predictions,
                               std::span<const int> labels) {
  if (predictions.size() != labels.size())
    throw DimensionError("classification_accuracy: length mismatch (" +
                         std::to_string(predictions.size()) + " vs " +
                         std::to_string(labels.size()) + ")");
  if (predictions.empty())
    throw DimensionError("classification_accuracy: empty inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    hits += predictions[i] == labels[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(predictions.size());
}

void write_pr_csv(const std::filesystem::path& path, const PxapReport& report,
                  double classification_accuracy_percent) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << "threshold,precision,recall\n";
  char buf[128];
  for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.3f,%.10g,%.10g\n", report.thresholds[i],
                  report.precision[i], report.recall[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "# PxAP=%.6f CL=%.6f\n", report.pxap,
                classification_accuracy_percent);
  out << buf;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace negev
