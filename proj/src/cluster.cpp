#include "specnet/cluster.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "specnet/error.hpp"
#include "specnet/spectral.hpp"

namespace specnet {

Labeling nearest_centroid(const Matrix& centroids, const Matrix& points) {
  if (centroids.cols() != points.cols())
    throw Error(Errc::DimensionMismatch, "points and centroids differ in dimension");
  Labeling out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      const double d = squared_distance(points.row(i), centroids.row(c));
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    out[i] = arg;
  }
  return out;
}

namespace {

Matrix plus_plus_init(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = x.rows();
  Matrix c(k, x.cols());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pick = first(rng);
  std::copy_n(x.row(pick).begin(), x.cols(), c.row(0).begin());
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), c.row(0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t j = 1; j < k; ++j) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (total > 0.0) {
      double r = u(rng) * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        r -= d2[i];
        if (r < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    std::copy_n(x.row(pick).begin(), x.cols(), c.row(j).begin());
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(x.row(i), c.row(j)));
  }
  return c;
}

double inertia_of(const Matrix& x, const Matrix& c, const Labeling& lab) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    s += squared_distance(x.row(i), c.row(static_cast<std::size_t>(lab[i])));
  return s;
}

struct LloydRun {
  Matrix centroids;
  Labeling labels;
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::size_t recoveries = 0;
  std::vector<double> trace;
};

LloydRun lloyd(const Matrix& x, Matrix c, std::size_t max_iter) {
  const std::size_t n = x.rows(), k = c.rows(), dim = x.cols();
  LloydRun run;
  Labeling lab = nearest_centroid(c, x);
  for (std::size_t it = 0; it < max_iter; ++it) {
    run.iterations = it + 1;
    // Update step.
    Matrix sums(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto cl = static_cast<std::size_t>(lab[i]);
      ++counts[cl];
      auto src = x.row(i);
      auto dst = sums.row(cl);
      for (std::size_t t = 0; t < dim; ++t) dst[t] += src[t];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      for (std::size_t t = 0; t < dim; ++t) c(j, t) = sums(j, t) / static_cast<double>(counts[j]);
    }
    // Reseed emptied clusters at the point farthest from its center.
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = squared_distance(x.row(i), c.row(static_cast<std::size_t>(lab[i])));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[static_cast<std::size_t>(lab[far])];
      lab[far] = static_cast<int>(j);
      counts[j] = 1;
      std::copy_n(x.row(far).begin(), dim, c.row(j).begin());
      ++run.recoveries;
    }
    run.trace.push_back(inertia_of(x, c, lab));
    // Assignment step.
    Labeling next = nearest_centroid(c, x);
    if (next == lab) break;
    lab = std::move(next);
  }
  run.inertia = inertia_of(x, c, lab);
  run.centroids = std::move(c);
  run.labels = std::move(lab);
  return run;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, const KMeansOptions& opts) {
  const std::size_t n = points.rows();
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  if (n < k)
    throw Error(Errc::TooFewPoints,
                "k-means needs at least k=" + std::to_string(k) + " points, got " +
                    std::to_string(n));
  std::mt19937_64 rng(opts.seed);
  KMeansResult best;
  bool have = false;
  const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    LloydRun run = lloyd(points, plus_plus_init(points, k, rng), opts.max_iterations);
    best.empty_recoveries += run.recoveries;
    if (!have || run.inertia < best.inertia) {
      have = true;
      best.centroids = std::move(run.centroids);
      best.labels = std::move(run.labels);
      best.inertia = run.inertia;
      best.iterations = run.iterations;
      best.inertia_trace = std::move(run.trace);
    }
  }
  return best;
}

Labeling assign(const ClusterModel& model, const Matrix& points) {
  return nearest_centroid(model.centroids, embed(model.spectral_map, points));
}

}  // namespace specnet
