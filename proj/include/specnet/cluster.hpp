#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "specnet/matrix.hpp"
#include "specnet/nn.hpp"

namespace specnet {

using Labeling = std::vector<int>;

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  Matrix centroids;  ///< k × dim
  Labeling labels;
  double inertia = 0.0;
  std::size_t iterations = 0;       ///< Lloyd iterations of the winning restart
  std::size_t empty_recoveries = 0; ///< clusters reseeded across all restarts
  std::vector<double> inertia_trace; ///< per-iteration inertia of the winning restart
};

/// Best-inertia Lloyd clustering over k-means++ restarts. An emptied cluster
/// is reseeded at the point farthest from its assigned center.
KMeansResult kmeans(const Matrix& points, std::size_t k, const KMeansOptions& opts = {});

/// Index of the nearest centroid for every row; ties go to the lower index.
Labeling nearest_centroid(const Matrix& centroids, const Matrix& points);

/// A trained spectral map (optionally with the Siamese net that defined its
/// affinities) plus k-means centroids in embedding space.
struct ClusterModel {
  Mlp spectral_map;
  std::optional<Mlp> siamese;
  Matrix centroids;

  std::size_t k() const noexcept { return centroids.rows(); }
};

/// Out-of-sample assignment: embed, then nearest centroid.
Labeling assign(const ClusterModel& model, const Matrix& points);

/// Clustering accuracy under the best one-to-one matching of cluster names to
/// labels (Kuhn–Munkres on the confusion matrix).
double acc(std::span<const int> truth, std::span<const int> pred);

/// I(l;c) / max{H(l), H(c)} with natural logarithms; 1 when both partitions
/// consist of a single cluster.
double nmi(std::span<const int> truth, std::span<const int> pred);

/// Unnormalized mutual information I(l;c) in nats.
double mutual_information(std::span<const int> truth, std::span<const int> pred);

/// Minimum-cost assignment on a square cost matrix; result[row] = column.
std::vector<std::size_t> hungarian(const Matrix& cost);

}  // namespace specnet
