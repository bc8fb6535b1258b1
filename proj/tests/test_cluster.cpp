#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "specnet/cluster.hpp"
#include "specnet/error.hpp"
#include "test_support.hpp"

using namespace specnet;
using specnet::testing::random_matrix;

namespace {

// Max over all bijections of the k names by exhaustive permutation.
double brute_acc(const Labeling& truth, const Labeling& pred, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (perm[static_cast<std::size_t>(pred[i])] == truth[i]) ++hits;
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(truth.size());
}

}  // namespace

TEST_CASE("kmeans examples") {
  const Matrix pts{{0.0}, {0.1}, {10.0}, {10.1}};
  const KMeansResult r = kmeans(pts, 2);
  std::vector<double> centers{r.centroids(0, 0), r.centroids(1, 0)};
  std::sort(centers.begin(), centers.end());
  CHECK(centers[0] == doctest::Approx(0.05));
  CHECK(centers[1] == doctest::Approx(10.05));
  CHECK(r.labels[0] == r.labels[1]);
  CHECK(r.labels[2] == r.labels[3]);
  CHECK(r.labels[0] != r.labels[2]);

  const Matrix three{{0.0, 0.0}, {5.0, 1.0}, {-3.0, 2.0}};
  const KMeansResult exact = kmeans(three, 3);
  CHECK(exact.inertia == 0.0);

  const Matrix same{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
  const KMeansResult deg = kmeans(same, 2);
  CHECK(deg.inertia == 0.0);
  CHECK(deg.empty_recoveries > 0);
  CHECK(deg.centroids(0, 0) == 1.0);
  CHECK(deg.centroids(1, 0) == 1.0);

  CHECK_THROWS_AS(kmeans(three, 4), Error);
}

TEST_CASE("kmeans is deterministic and inertia never rises") {
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(200, 3, rng);
  KMeansOptions o;
  o.seed = 9;
  const KMeansResult a = kmeans(x, 5, o);
  const KMeansResult b = kmeans(x, 5, o);
  CHECK(a.labels == b.labels);
  CHECK(a.centroids == b.centroids);
  for (std::size_t i = 1; i < a.inertia_trace.size(); ++i)
    CHECK(a.inertia_trace[i] <= a.inertia_trace[i - 1] + 1e-12);
  CHECK(nearest_centroid(a.centroids, x) == a.labels);
}

TEST_CASE("nearest centroid ties go to the lower index") {
  const Matrix c{{0.0, 0.0}, {2.0, 0.0}};
  const Labeling l = nearest_centroid(c, Matrix{{1.0, 0.0}, {2.0, 0.0}, {-1.0, 5.0}});
  CHECK(l == Labeling{0, 1, 0});
  CHECK_THROWS_AS(nearest_centroid(c, Matrix{{1.0}}), Error);
}

TEST_CASE("acc examples") {
  CHECK(acc(Labeling{1, 1, 2, 2}, Labeling{1, 1, 2, 2}) == 1.0);
  CHECK(acc(Labeling{1, 1, 2, 2}, Labeling{2, 2, 1, 1}) == 1.0);
  CHECK(acc(Labeling{1, 1, 2, 2}, Labeling{1, 2, 1, 2}) == 0.5);
  CHECK(acc(Labeling{0, 0, 0, 1}, Labeling{3, 3, 4, 4}) == 0.75);
  CHECK_THROWS_AS(acc(Labeling{1, 2}, Labeling{1}), Error);
}

TEST_CASE("acc agrees with brute force over permutations") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 4;
    std::uniform_int_distribution<int> lab(0, k - 1);
    const std::size_t n = 5 + static_cast<std::size_t>(trial % 30);
    Labeling t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = lab(rng);
      p[i] = lab(rng);
    }
    CHECK(acc(t, p) == doctest::Approx(brute_acc(t, p, k)).epsilon(1e-12));
    // Renaming the clusters changes nothing.
    Labeling renamed = p;
    for (int& v : renamed) v = (v + 1) % k;
    CHECK(acc(t, renamed) == doctest::Approx(acc(t, p)).epsilon(1e-12));
  }
}

TEST_CASE("hungarian on a hand example") {
  const Matrix cost{{4.0, 1.0, 3.0}, {2.0, 0.0, 5.0}, {3.0, 2.0, 2.0}};
  const auto m = hungarian(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) total += cost(i, m[i]);
  CHECK(total == 5.0);  // 1 + 2 + 2
}

TEST_CASE("nmi examples") {
  CHECK(nmi(Labeling{1, 1, 2, 2}, Labeling{1, 1, 2, 2}) == doctest::Approx(1.0));
  CHECK(nmi(Labeling{1, 1, 2, 2}, Labeling{1, 2, 1, 2}) == doctest::Approx(0.0));
  CHECK(nmi(Labeling{1, 1, 2, 2}, Labeling{5, 5, 9, 9}) == doctest::Approx(1.0));
  CHECK(nmi(Labeling{3, 3, 3}, Labeling{0, 0, 0}) == 1.0);
  // One side a single cluster, the other not: I = 0.
  CHECK(nmi(Labeling{0, 0, 0, 0}, Labeling{0, 1, 0, 1}) == 0.0);
  // truth (0,0,1,1), pred (0,0,0,1): joint counts 2, 1, 1 summed by hand.
  const double i = 0.5 * std::log(2.0 / 1.5) + 0.25 * std::log(1.0 / 1.5) + 0.25 * std::log(2.0);
  const double h_max = std::log(2.0);
  CHECK(nmi(Labeling{0, 0, 1, 1}, Labeling{0, 0, 0, 1}) == doctest::Approx(i / h_max));
  CHECK_THROWS_AS(nmi(Labeling{1}, Labeling{1, 2}), Error);
}

TEST_CASE("mutual information is symmetric and nmi stays in range") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    Labeling a(30), b(30);
    for (std::size_t i = 0; i < 30; ++i) {
      a[i] = lab(rng);
      b[i] = lab(rng);
    }
    CHECK(mutual_information(a, b) == doctest::Approx(mutual_information(b, a)).epsilon(1e-12));
    const double v = nmi(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("assign embeds then picks the nearest centroid") {
  ClusterModel m;
  m.spectral_map = Mlp(1, {DenseLayer{Matrix{{1.0, -1.0}}, {0.0, 0.0}, Activation::linear}});
  m.centroids = Matrix{{0.0, 0.0}, {2.0, -2.0}};
  CHECK(assign(m, Matrix{{0.1}, {1.9}, {1.0}}) == Labeling{0, 1, 0});
  CHECK(m.k() == 2);
}
