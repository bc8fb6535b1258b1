#pragma once

#include <cstdint>
#include <vector>

#include "specnet/affinity.hpp"
#include "specnet/cluster.hpp"
#include "specnet/linalg.hpp"
#include "specnet/matrix.hpp"
#include "specnet/nn.hpp"

namespace specnet {

/// Exact spectral clustering: the k eigenvectors of D − W with smallest
/// eigenvalues, clustered by k-means.
struct SpectralOracle {
  Labeling labels;
  Matrix eigenvectors;              ///< n × k
  std::vector<double> eigenvalues;  ///< the k smallest, ascending
  double sigma = 0.0;               ///< kernel scale (0 when W was given)
};

SpectralOracle spectral_clustering_from_affinity(const Matrix& w, std::size_t k,
                                                 const KMeansOptions& kmeans_opts = {});

/// Builds the full n×n affinity per `cfg` (Euclidean, or Siamese when a
/// model is given) and runs the dense oracle on it.
SpectralOracle exact_spectral_clustering(const Matrix& points, std::size_t k,
                                         const AffinityConfig& cfg,
                                         const KMeansOptions& kmeans_opts = {},
                                         const Mlp* siamese = nullptr);

/// grassmann_sq between the network's embedding of `points` and a reference
/// eigenvector basis.
double grassmann_to_subspace(const Mlp& model, const Matrix& points, const Matrix& eigenvectors);

/// grassmann_sq between the network's embedding and the bottom-k eigenvectors
/// of the full Laplacian built from `points`.
double grassmann_vs_oracle(const Mlp& model, const Matrix& points, std::size_t k,
                           const AffinityConfig& cfg);

}  // namespace specnet
