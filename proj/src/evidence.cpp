#include "negev/evidence.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace negev {
namespace {

constexpr double kDegenerateTotal = 1e-12;

// Sequential weighted draws without replacement. `weights` is consumed:
// picked pixels get weight 0 and leave `eligible`. When the remaining total
// weight is degenerate, the remaining draws are uniform over what is left.
std::vector<int> draw_without_replacement(std::vector<double>& weights,
                                          std::vector<char>& eligible, int count,
                                          RngStream& rng) {
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(count));
  const std::size_t n = weights.size();
  for (int draw = 0; draw < count; ++draw) {
    double total = 0.0;
    std::size_t remaining = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!eligible[i]) continue;
      total += weights[i];
      ++remaining;
    }
    if (remaining == 0) break;  // cannot happen under the n <= |Omega|/2 precondition

    std::size_t chosen = n;
    if (total <= kDegenerateTotal) {
      std::uint64_t k = rng.next_below(remaining);
      for (std::size_t i = 0; i < n; ++i) {
        if (!eligible[i]) continue;
        if (k == 0) {
          chosen = i;
          break;
        }
        --k;
      }
    } else {
      const double u = rng.next_unit() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!eligible[i]) continue;
        acc += weights[i];
        if (u < acc) {
          chosen = i;
          break;
        }
      }
      if (chosen == n) {  // guard against accumulated rounding at u ~ total
        for (std::size_t i = n; i-- > 0;)
          if (eligible[i]) {
            chosen = i;
            break;
          }
      }
    }
    eligible[chosen] = 0;
    weights[chosen] = 0.0;
    picked.push_back(static_cast<int>(chosen));
  }
  return picked;
}

}  // namespace

std::size_t PseudoMask::labeled_count() const {
  std::size_t c = 0;
  for (std::int8_t l : labels) c += l != kUnknown;
  return c;
}

EvidenceSet sample_evidence(const Cam& cam, int n, SamplingMode mode, RngStream& rng) {
  cam.validate();
  const std::size_t omega = cam.size();
  if (omega == 0) throw DimensionError("sample_evidence: empty pixel domain");
  if (n < 1 || static_cast<std::size_t>(n) > omega / 2)
    throw ConfigError("sample_evidence: n must satisfy 1 <= n <= |Omega|/2, got n=" +
                      std::to_string(n) + " over " + std::to_string(omega) + " pixels");

  EvidenceSet ev;
  ev.n = n;
  ev.mode = mode;

  if (mode == SamplingMode::Static) {
    std::vector<int> order(omega);
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> by_desc = order;
    std::stable_sort(by_desc.begin(), by_desc.end(), [&](int a, int b) {
      return cam.values[static_cast<std::size_t>(a)] > cam.values[static_cast<std::size_t>(b)];
    });
    ev.positive.assign(by_desc.begin(), by_desc.begin() + n);

    std::vector<char> taken(omega, 0);
    for (int p : ev.positive) taken[static_cast<std::size_t>(p)] = 1;
    std::vector<int> by_asc = order;
    std::stable_sort(by_asc.begin(), by_asc.end(), [&](int a, int b) {
      return cam.values[static_cast<std::size_t>(a)] < cam.values[static_cast<std::size_t>(b)];
    });
    for (int p : by_asc) {
      if (taken[static_cast<std::size_t>(p)]) continue;
      ev.negative.push_back(p);
      if (static_cast<int>(ev.negative.size()) == n) break;
    }
    return ev;
  }

  std::vector<double> fg_weights = cam.values;
  std::vector<char> eligible(omega, 1);
  ev.positive = draw_without_replacement(fg_weights, eligible, n, rng);

  // Background weights are the inverted map; pixels already claimed as
  // foreground stay ineligible.
  std::vector<double> bg_weights(omega);
  for (std::size_t i = 0; i < omega; ++i) bg_weights[i] = 1.0 - cam.values[i];
  ev.negative = draw_without_replacement(bg_weights, eligible, n, rng);
  return ev;
}

PseudoMask build_pseudo_mask(const EvidenceSet& evidence, int height, int width) {
  if (height <= 0 || width <= 0)
    throw DimensionError("build_pseudo_mask: dims must be positive");
  PseudoMask mask;
  mask.height = height;
  mask.width = width;
  mask.labels.assign(static_cast<std::size_t>(height) * width, PseudoMask::kUnknown);
  const auto place = [&](int p, std::int8_t label) {
    if (p < 0 || static_cast<std::size_t>(p) >= mask.labels.size())
      throw DimensionError("build_pseudo_mask: pixel index " + std::to_string(p) +
                           " outside " + std::to_string(height) + "x" + std::to_string(width));
    if (mask.labels[static_cast<std::size_t>(p)] != PseudoMask::kUnknown)
      throw StateError("build_pseudo_mask: pixel " + std::to_string(p) + " labeled twice");
    mask.labels[static_cast<std::size_t>(p)] = label;
  };
  for (int p : evidence.positive) place(p, 1);
  for (int p : evidence.negative) place(p, 0);
  return mask;
}

RngStream resample_schedule(std::uint64_t global_seed, std::string_view image_id,
                            std::uint64_t epoch) {
  return derive_stream(global_seed, image_id, epoch);
}

}  // namespace negev
