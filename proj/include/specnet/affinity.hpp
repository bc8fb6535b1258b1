#pragma once

#include <optional>
#include <span>
#include <vector>

#include "specnet/matrix.hpp"
#include "specnet/nn.hpp"

namespace specnet {

enum class ScaleMode {
  per_point_median_nn,  ///< median over points of the distance to the nearest neighbor
  global_median_kth,    ///< median over points of the distance to the scale_k-th neighbor
  fixed,                ///< fixed_sigma as given
};

enum class DistanceKind { euclidean, siamese };

struct AffinityConfig {
  std::size_t n_neighbors = 10;
  ScaleMode scale_mode = ScaleMode::global_median_kth;
  std::size_t scale_k = 3;
  std::optional<double> fixed_sigma;
  DistanceKind distance = DistanceKind::euclidean;

  void validate() const;
};

/// Symmetric nonnegative batch affinity with zero diagonal, plus row sums.
struct AffinityBatch {
  Matrix w;
  std::vector<double> degrees;
};

/// Label value for points whose label is unknown.
inline constexpr int kUnlabeled = -1;

using NeighborLists = std::vector<std::vector<std::size_t>>;

/// k nearest neighbors of every row by Euclidean distance, excluding the
/// row itself, nearest first, ties broken by lower index.
NeighborLists knn(const Matrix& points, std::size_t k);
NeighborLists knn_from_sq_distances(const Matrix& sq_dist, std::size_t k);

double select_scale(const Matrix& points, const AffinityConfig& cfg);
double select_scale_from_sq_distances(const Matrix& sq_dist, const AffinityConfig& cfg);

/// W_ij = exp(−‖x_i−x_j‖²/2σ²) when j is among the n_neighbors of i, else 0,
/// then symmetrized as (W+Wᵀ)/2. Pairs of labeled points are then set to 1
/// (same label) or 0 (different labels).
AffinityBatch affinity_from_sq_distances(const Matrix& sq_dist, std::size_t n_neighbors,
                                         double sigma, std::span<const int> labels = {});

/// Full pipeline on raw points. When cfg.distance is siamese, distances are
/// measured between the embeddings produced by `siamese`.
AffinityBatch gaussian_affinity(const Matrix& points, const AffinityConfig& cfg,
                                std::span<const int> labels = {}, const Mlp* siamese = nullptr);

/// Sets W_ij for every labeled pair (1 when labels agree, 0 otherwise) and
/// refreshes the degrees. Applying it twice is the same as applying it once.
void apply_label_override(AffinityBatch& batch, std::span<const int> labels);

/// Distance between Siamese embeddings of two points.
double siamese_distance(const Mlp& model, std::span<const double> xi, std::span<const double> xj);

/// Rows mapped through the network (the space in which Siamese distances live).
Matrix siamese_embed(const Mlp& model, const Matrix& points);

}  // namespace specnet
