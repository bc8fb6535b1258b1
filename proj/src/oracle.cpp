#include "specnet/oracle.hpp"

#include "specnet/error.hpp"
#include "specnet/spectral.hpp"

namespace specnet {

SpectralOracle spectral_clustering_from_affinity(const Matrix& w, std::size_t k,
                                                 const KMeansOptions& kmeans_opts) {
  if (k < 1 || k > w.rows())
    throw Error(Errc::InvalidArgument, "k must lie in [1, n] for the spectral oracle");
  const EigenPair e = sym_eigen(laplacian(w));
  SpectralOracle out;
  out.eigenvectors = e.vectors.left_cols(k);
  out.eigenvalues.assign(e.values.begin(), e.values.begin() + static_cast<std::ptrdiff_t>(k));
  out.labels = kmeans(out.eigenvectors, k, kmeans_opts).labels;
  return out;
}

SpectralOracle exact_spectral_clustering(const Matrix& points, std::size_t k,
                                         const AffinityConfig& cfg,
                                         const KMeansOptions& kmeans_opts, const Mlp* siamese) {
  cfg.validate();
  const Matrix space = siamese ? siamese_embed(*siamese, points) : points;
  const Matrix sq = pairwise_sq_distances(space);
  const double sigma = select_scale_from_sq_distances(sq, cfg);
  const AffinityBatch w = affinity_from_sq_distances(sq, cfg.n_neighbors, sigma);
  SpectralOracle out = spectral_clustering_from_affinity(w.w, k, kmeans_opts);
  out.sigma = sigma;
  return out;
}

double grassmann_to_subspace(const Mlp& model, const Matrix& points, const Matrix& eigenvectors) {
  return grassmann_sq(embed(model, points), eigenvectors);
}

double grassmann_vs_oracle(const Mlp& model, const Matrix& points, std::size_t k,
                           const AffinityConfig& cfg) {
  const SpectralOracle o = exact_spectral_clustering(points, k, cfg);
  return grassmann_to_subspace(model, points, o.eigenvectors);
}

}  // namespace specnet
