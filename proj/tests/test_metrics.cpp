#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "negev/metrics.hpp"
#include "negev/rng.hpp"

using namespace negev;

namespace {

// Brute-force reference: recompute TP/FP/FN by a full pixel scan at every
// grid threshold, then integrate the same way the report defines.
double pxap_bruteforce(std::span<const EvalPair> pairs) {
  const auto& grid = pxap_threshold_grid();
  std::vector<double> precision(grid.size()), recall(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const EvalPair& p : pairs)
      for (std::size_t j = 0; j < p.scores.size(); ++j) {
        const bool pred = p.scores[j] >= grid[i];
        const bool pos = p.mask[j] != 0;
        if (pred && pos) ++tp;
        if (pred && !pos) ++fp;
        if (!pred && pos) ++fn;
      }
    precision[i] = (tp + fp) == 0 ? 1.0 : double(tp) / double(tp + fp);
    recall[i] = double(tp) / double(tp + fn);
  }
  double ap = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double next = i + 1 < grid.size() ? recall[i + 1] : 0.0;
    ap += (recall[i] - next) * precision[i];
  }
  return 100.0 * ap;
}

EvalPair random_pair(RngStream& rng, int h, int w, double pos_fraction = 0.4) {
  EvalPair p;
  p.height = h;
  p.width = w;
  const std::size_t n = std::size_t(h) * w;
  p.scores.resize(n);
  p.mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.scores[i] = rng.next_unit();
    p.mask[i] = rng.next_unit() < pos_fraction ? 1 : 0;
  }
  return p;
}

}  // namespace

TEST_CASE("pr_at_threshold hand cases") {
  EvalPair perfect{2, 2, {1, 0, 1, 0}, {1, 0, 1, 0}};
  std::vector<EvalPair> pool{perfect};
  auto [p, r] = pr_at_threshold(pool, 0.5);
  CHECK(p == doctest::Approx(1.0));
  CHECK(r == doctest::Approx(1.0));

  EvalPair allpos{2, 2, {1, 1, 1, 1}, {1, 1, 0, 0}};
  std::vector<EvalPair> pool2{allpos};
  auto [p2, r2] = pr_at_threshold(pool2, 0.5);
  CHECK(p2 == doctest::Approx(0.5));
  CHECK(r2 == doctest::Approx(1.0));

  EvalPair four{1, 4, {0.9, 0.6, 0.4, 0.1}, {1, 0, 1, 0}};
  std::vector<EvalPair> pool3{four};
  auto [p3, r3] = pr_at_threshold(pool3, 0.5);
  CHECK(p3 == doctest::Approx(0.5));
  CHECK(r3 == doctest::Approx(0.5));

  EvalPair nopos{1, 2, {0.3, 0.4}, {0, 0}};
  std::vector<EvalPair> pool4{nopos};
  CHECK_THROWS_AS(pr_at_threshold(pool4, 0.5), ProtocolError);
  CHECK_THROWS_AS(pr_at_threshold(pool3, 1.5), ConfigError);
}

TEST_CASE("pxap hand example scores [0.9,0.6,0.4,0.1] mask [1,0,1,0]") {
  std::vector<EvalPair> pool{{1, 4, {0.9, 0.6, 0.4, 0.1}, {1, 0, 1, 0}}};
  PxapReport rep = pxap(pool);
  // Segments: P=2/3 down to R=1, P=1 at R=0.5 -> 0.5*(2/3) + 0.5*1 = 5/6.
  CHECK(rep.pxap == doctest::Approx(83.3333).epsilon(1e-4));
  CHECK(rep.pxap == doctest::Approx(pxap_bruteforce(pool)).epsilon(1e-12));
}

TEST_CASE("pxap of a perfect predictor is 100") {
  std::vector<EvalPair> pool{{2, 2, {1, 0, 0, 1}, {1, 0, 0, 1}}};
  CHECK(pxap(pool).pxap == doctest::Approx(100.0));
}

TEST_CASE("constant score map gives 100*q") {
  // 4 of 10 pixels positive under a constant 0.5 map -> PxAP = 40.
  std::vector<EvalPair> pool{
      {1, 10, std::vector<double>(10, 0.5), {1, 0, 0, 1, 0, 0, 1, 0, 0, 1}}};
  PxapReport rep = pxap(pool);
  CHECK(rep.pxap == doctest::Approx(40.0).epsilon(1e-9));
  CHECK(rep.pxap == doctest::Approx(pxap_bruteforce(pool)).epsilon(1e-12));
}

TEST_CASE("pxap equals brute force on 10 seeded 8x8 sets") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    std::vector<EvalPair> pool;
    for (int i = 0; i < 10; ++i) pool.push_back(random_pair(rng, 8, 8));
    PxapReport rep = pxap(pool);
    const double brute = pxap_bruteforce(pool);
    CHECK(std::fabs(rep.pxap - brute) < 1e-9);

    // Recall is non-increasing across the sweep.
    for (std::size_t i = 1; i < rep.recall.size(); ++i)
      CHECK(rep.recall[i] <= rep.recall[i - 1] + 1e-15);

    // Pooled protocol: order of pairs is irrelevant.
    std::vector<EvalPair> shuffled(pool.rbegin(), pool.rend());
    std::swap(shuffled[0], shuffled[3]);
    CHECK(pxap(shuffled).pxap == rep.pxap);
  }
}

TEST_CASE("rank relabeling onto the same grid points preserves pxap") {
  RngStream rng(42);
  // Scores drawn directly from grid points, then relabeled by rank onto
  // other grid points via a strictly increasing map.
  std::vector<EvalPair> pool{random_pair(rng, 8, 8)};
  for (double& s : pool[0].scores)
    s = std::round(s * 100.0) / 100.0;  // land exactly on coarse grid points

  std::vector<double> uniq(pool[0].scores);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  // Map the k-th smallest distinct value to 0.002*k + 0.1 (increasing, still
  // on the sweep grid, same crossing pattern).
  std::vector<EvalPair> relabeled = pool;
  for (double& s : relabeled[0].scores) {
    const std::size_t k = static_cast<std::size_t>(
        std::lower_bound(uniq.begin(), uniq.end(), s) - uniq.begin());
    s = 0.1 + 0.002 * static_cast<double>(k);
  }
  CHECK(pxap(pool).pxap == doctest::Approx(pxap(relabeled).pxap).epsilon(1e-12));
}

TEST_CASE("classification accuracy") {
  std::vector<int> a{1, 0, 1, 1};
  CHECK(classification_accuracy(a, a) == doctest::Approx(100.0));
  std::vector<int> b{0, 1, 0, 0};
  CHECK(classification_accuracy(a, b) == doctest::Approx(0.0));
  std::vector<int> c{1, 0, 1, 0};
  CHECK(classification_accuracy(a, c) == doctest::Approx(75.0));
  std::vector<int> d{1, 0};
  CHECK_THROWS_AS(classification_accuracy(a, d), DimensionError);
}

TEST_CASE("per-image mean variant skips empty-mask images") {
  RngStream rng(7);
  std::vector<EvalPair> pool{random_pair(rng, 8, 8)};
  EvalPair empty = random_pair(rng, 8, 8);
  std::fill(empty.mask.begin(), empty.mask.end(), 0);
  pool.push_back(empty);
  const double mean = pxap_per_image_mean(pool);
  const double solo = pxap(std::span<const EvalPair>(&pool[0], 1)).pxap;
  CHECK(mean == doctest::Approx(solo));
}

TEST_CASE("pr csv serialization") {
  namespace fs = std::filesystem;
  std::vector<EvalPair> pool{{1, 4, {0.9, 0.6, 0.4, 0.1}, {1, 0, 1, 0}}};
  PxapReport rep = pxap(pool);
  const fs::path path = fs::temp_directory_path() / "negev_pr.csv";
  write_pr_csv(path, rep, 97.5);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "threshold,precision,recall");
  std::size_t rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    last = line;
    ++rows;
  }
  CHECK(rows == 1002);  // 1001 thresholds + summary
  CHECK(last.find("# PxAP=") == 0);
  CHECK(last.find("CL=97.5") != std::string::npos);
  fs::remove(path);
}
