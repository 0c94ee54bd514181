#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "negev/loss.hpp"
#include "negev/ops.hpp"
#include "negev/rng.hpp"
#include "support.hpp"

using namespace negev;
using negev::testing::check_gradient;
using negev::testing::rand_tensor;

namespace {

SoftmaxMaps maps_from_foreground(int h, int w, const std::vector<double>& fg) {
  std::vector<double> v(2 * fg.size());
  for (std::size_t i = 0; i < fg.size(); ++i) {
    v[i] = 1.0 - fg[i];
    v[fg.size() + i] = fg[i];
  }
  return SoftmaxMaps{Tensor::from_values({2, h, w}, std::move(v))};
}

PseudoMask mask_of(int h, int w, std::vector<std::pair<int, std::int8_t>> labels) {
  PseudoMask m;
  m.height = h;
  m.width = w;
  m.labels.assign(static_cast<std::size_t>(h) * w, PseudoMask::kUnknown);
  for (auto [p, l] : labels) m.labels[static_cast<std::size_t>(p)] = l;
  return m;
}

}  // namespace

TEST_CASE("pixel_bce closed forms") {
  CHECK(pixel_bce(1, 0.5, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK(pixel_bce(1, 0.75, 0.25) == doctest::Approx(1.3863).epsilon(1e-4));
  CHECK(pixel_bce(0, 1.0 - 1e-8, 1e-8) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(pixel_bce(0, 1e-8, 1.0 - 1e-8) == doctest::Approx(-std::log(1e-8)));

  // Literal orientation collapses to -log(S1) for both labels.
  CHECK(pixel_bce(0, 0.75, 0.25, 1e-8, true) == doctest::Approx(-std::log(0.25)));
  CHECK(pixel_bce(1, 0.75, 0.25, 1e-8, true) == doctest::Approx(-std::log(0.25)));
}

TEST_CASE("partial_ce sums labeled pixels only") {
  LossConfig cfg;
  SoftmaxMaps maps = maps_from_foreground(2, 2, {0.5, 0.5, 0.9, 0.1});
  PseudoMask mask = mask_of(2, 2, {{0, 1}, {1, 0}});
  Tensor loss = partial_ce(maps, mask, cfg);
  CHECK(loss.item() == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));
  CHECK(loss.item() == doctest::Approx(1.3863).epsilon(1e-4));

  // Confident correct predictions give ~0.
  SoftmaxMaps good = maps_from_foreground(1, 2, {1.0 - 1e-8, 1e-8});
  PseudoMask gm = mask_of(1, 2, {{0, 1}, {1, 0}});
  CHECK(partial_ce(good, gm, cfg).item() == doctest::Approx(0.0).epsilon(1e-6));

  // Perturbing an unknown pixel leaves the value unchanged.
  SoftmaxMaps perturbed = maps_from_foreground(2, 2, {0.5, 0.5, 0.123, 0.987});
  CHECK(partial_ce(perturbed, mask, cfg).item() ==
        partial_ce(maps, mask, cfg).item());

  PseudoMask empty = mask_of(2, 2, {});
  CHECK_THROWS_AS(partial_ce(maps, empty, cfg), StateError);
}

TEST_CASE("negative_sample_loss values") {
  LossConfig cfg;
  SoftmaxMaps confident = maps_from_foreground(2, 2, {1e-8, 1e-8, 1e-8, 1e-8});
  CHECK(negative_sample_loss(confident, cfg).item() == doctest::Approx(0.0).epsilon(1e-6));

  SoftmaxMaps half = maps_from_foreground(2, 2, {0.5, 0.5, 0.5, 0.5});
  CHECK(negative_sample_loss(half, cfg).item() == doctest::Approx(std::log(2.0)));

  // Pixel-loop oracle on a random 4x4 map, both reductions.
  RngStream rng(3);
  std::vector<double> fg(16);
  for (double& x : fg) x = 0.05 + 0.9 * rng.next_unit();
  SoftmaxMaps maps = maps_from_foreground(4, 4, fg);
  double hand = 0.0;
  for (double f : fg) hand += -std::log(1.0 - f);
  CHECK(negative_sample_loss(maps, cfg).item() == doctest::Approx(hand / 16.0).epsilon(1e-12));
  cfg.negative_term_reduction = Reduction::Sum;
  CHECK(negative_sample_loss(maps, cfg).item() == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("corrected formula vanishes and literal formula diverges as S0 -> 1") {
  LossConfig corrected;
  LossConfig literal;
  literal.paper_literal = true;
  double prev_corrected = 1e300;
  double prev_literal = -1.0;
  for (double gap : {1e-1, 1e-2, 1e-4, 1e-6}) {
    SoftmaxMaps maps = maps_from_foreground(2, 2, {gap, gap, gap, gap});
    const double c = negative_sample_loss(maps, corrected).item();
    const double l = negative_sample_loss(maps, literal).item();
    CHECK(c < prev_corrected);
    CHECK(l > prev_literal);
    prev_corrected = c;
    prev_literal = l;
  }
  CHECK(prev_corrected < 1e-5);
  CHECK(prev_literal > 10.0);  // pinned at -log(clamp) ceiling ~ 18.4
}

TEST_CASE("total_loss branch gating and scaling") {
  SoftmaxMaps maps = maps_from_foreground(2, 2, {0.5, 0.5, 0.5, 0.5});
  PseudoMask mask = mask_of(2, 2, {{0, 1}, {3, 0}});
  LossConfig cfg;

  LossValue neg = total_loss(maps, mask, /*fully_negative=*/true, cfg);
  CHECK(neg.branch == LossBranch::FullyNegative);
  CHECK(neg.evidence_term == 0.0);
  CHECK(neg.negative_term == doctest::Approx(std::log(2.0)));
  CHECK(neg.total.item() == neg.negative_term);

  LossValue ev = total_loss(maps, mask, false, cfg);
  CHECK(ev.branch == LossBranch::Evidence);
  CHECK(ev.negative_term == 0.0);
  CHECK(ev.evidence_term == doctest::Approx(2.0 * std::log(2.0)));

  cfg.lambda = 0.0;
  CHECK(total_loss(maps, mask, false, cfg).total.item() == 0.0);

  cfg.lambda = 0.1;
  SoftmaxMaps quarter = maps_from_foreground(2, 2, {0.25, 0.25, 0.75, 0.75});
  PseudoMask two = mask_of(2, 2, {{0, 1}, {1, 1}});
  // partial_ce = 2 * -log(0.25) = 1.3863... scaled by 0.1
  LossValue scaled = total_loss(quarter, two, false, cfg);
  CHECK(scaled.total.item() == doctest::Approx(0.1 * 2.0 * -std::log(0.25)).epsilon(1e-9));
  CHECK(scaled.total.item() == doctest::Approx(0.277259).epsilon(1e-4));

  // Exact lambda scaling: loss(lambda=c) == c * loss(lambda=1).
  LossConfig unit;
  const double base = total_loss(quarter, two, false, unit).total.item();
  for (double c : {0.5, 2.0, 7.25}) {
    LossConfig sc;
    sc.lambda = c;
    CHECK(total_loss(quarter, two, false, sc).total.item() == c * base);
  }
}

TEST_CASE("config validation") {
  LossConfig bad;
  bad.lambda = -1.0;
  SoftmaxMaps maps = maps_from_foreground(1, 2, {0.5, 0.5});
  PseudoMask mask = mask_of(1, 2, {{0, 1}});
  CHECK_THROWS_AS(partial_ce(maps, mask, bad), ConfigError);
  LossConfig bad2;
  bad2.prob_clamp = 0.7;
  CHECK_THROWS_AS(negative_sample_loss(maps, bad2), ConfigError);
}

TEST_CASE("gradients of the composite loss match finite differences at the logits") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    Tensor logits = rand_tensor({2, 4, 4}, rng, -2.0, 2.0);
    PseudoMask mask = mask_of(4, 4, {{1, 1}, {6, 0}, {11, 1}, {13, 0}});

    // Evidence branch through the softmax.
    LossConfig cfg;
    cfg.lambda = 1.7;
    auto evidence_build = [&](const Tensor& t) {
      SoftmaxMaps maps{pixel_softmax(t)};
      return total_loss(maps, mask, false, cfg).total;
    };
    CHECK(check_gradient(evidence_build, logits).failed == 0);

    // Fully negative branch, mean and sum reductions.
    auto negative_build = [&](const Tensor& t) {
      SoftmaxMaps maps{pixel_softmax(t)};
      return total_loss(maps, mask, true, cfg).total;
    };
    CHECK(check_gradient(negative_build, logits).failed == 0);

    LossConfig sum_cfg;
    sum_cfg.negative_term_reduction = Reduction::Sum;
    auto sum_build = [&](const Tensor& t) {
      SoftmaxMaps maps{pixel_softmax(t)};
      return total_loss(maps, mask, true, sum_cfg).total;
    };
    CHECK(check_gradient(sum_build, logits).failed == 0);

    // Literal orientation also differentiates cleanly.
    LossConfig lit;
    lit.paper_literal = true;
    auto literal_build = [&](const Tensor& t) {
      SoftmaxMaps maps{pixel_softmax(t)};
      return total_loss(maps, mask, false, lit).total;
    };
    CHECK(check_gradient(literal_build, logits).failed == 0);

    // Supervised dense loss.
    PseudoMask full = mask_of(4, 4, {});
    for (std::size_t i = 0; i < full.labels.size(); ++i)
      full.labels[i] = static_cast<std::int8_t>(i % 2);
    auto supervised_build = [&](const Tensor& t) {
      SoftmaxMaps maps{pixel_softmax(t)};
      return full_mask_bce(maps, full);
    };
    CHECK(check_gradient(supervised_build, logits).failed == 0);
  }
}

TEST_CASE("partial_ce gradient is local to labeled pixels") {
  RngStream rng(11);
  Tensor logits = rand_tensor({2, 4, 4}, rng);
  logits.set_requires_grad(true);
  PseudoMask mask = mask_of(4, 4, {{2, 1}, {9, 0}});
  LossConfig cfg;
  SoftmaxMaps maps{pixel_softmax(logits)};
  backward(partial_ce(maps, mask, cfg));
  auto g = logits.grad();
  const std::size_t n = 16;
  for (std::size_t p = 0; p < n; ++p) {
    const bool labeled = p == 2 || p == 9;
    const double mag = std::fabs(g[p]) + std::fabs(g[n + p]);
    if (labeled)
      CHECK(mag > 1e-6);
    else
      CHECK(mag == 0.0);
  }
}

TEST_CASE("negative_sample_loss responds monotonically to background mass") {
  LossConfig cfg;
  double prev = 1e300;
  for (double s0 : {0.2, 0.4, 0.6, 0.8, 0.95}) {
    std::vector<double> fg(9, 1.0 - s0);
    SoftmaxMaps maps = maps_from_foreground(3, 3, fg);
    const double v = negative_sample_loss(maps, cfg).item();
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("full_mask_bce requires a dense mask") {
  SoftmaxMaps maps = maps_from_foreground(1, 2, {0.5, 0.5});
  PseudoMask sparse = mask_of(1, 2, {{0, 1}});
  CHECK_THROWS_AS(full_mask_bce(maps, sparse), StateError);
  PseudoMask dense = mask_of(1, 2, {{0, 1}, {1, 0}});
  CHECK(full_mask_bce(maps, dense).item() == doctest::Approx(std::log(2.0)));
}
