#include "specnet/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "specnet/error.hpp"

namespace specnet {

void AffinityConfig::validate() const {
  if (n_neighbors < 1) throw Error(Errc::InvalidArgument, "n_neighbors must be >= 1");
  if (scale_mode == ScaleMode::fixed && (!fixed_sigma || !(*fixed_sigma > 0.0)))
    throw Error(Errc::InvalidArgument, "fixed scale mode needs a positive sigma");
  if (scale_mode == ScaleMode::global_median_kth && scale_k < 1)
    throw Error(Errc::InvalidArgument, "scale_k must be >= 1");
}

NeighborLists knn_from_sq_distances(const Matrix& sq_dist, std::size_t k) {
  const std::size_t m = sq_dist.rows();
  if (k >= m)
    throw Error(Errc::TooFewPoints, "need more than " + std::to_string(k) + " points, got " +
                                        std::to_string(m));
  NeighborLists out(m);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < m; ++i) {
    idx.clear();
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) idx.push_back(j);
    auto row = sq_dist.row(i);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        return row[a] < row[b] || (row[a] == row[b] && a < b);
                      });
    out[i].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

NeighborLists knn(const Matrix& points, std::size_t k) {
  if (k >= points.rows())
    throw Error(Errc::TooFewPoints, "need more than " + std::to_string(k) + " points, got " +
                                        std::to_string(points.rows()));
  return knn_from_sq_distances(pairwise_sq_distances(points), k);
}

namespace {

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

double select_scale_from_sq_distances(const Matrix& sq_dist, const AffinityConfig& cfg) {
  if (cfg.scale_mode == ScaleMode::fixed) {
    cfg.validate();
    return *cfg.fixed_sigma;
  }
  const std::size_t kth = cfg.scale_mode == ScaleMode::per_point_median_nn ? 1 : cfg.scale_k;
  if (kth < 1) throw Error(Errc::InvalidArgument, "scale_k must be >= 1");
  if (sq_dist.rows() < kth + 1)
    throw Error(Errc::TooFewPoints, "scale heuristic needs at least " + std::to_string(kth + 1) +
                                        " points");
  const NeighborLists nn = knn_from_sq_distances(sq_dist, kth);
  std::vector<double> dist(nn.size());
  for (std::size_t i = 0; i < nn.size(); ++i) dist[i] = std::sqrt(sq_dist(i, nn[i][kth - 1]));
  const double sigma = median(std::move(dist));
  if (!(sigma > 0.0))
    throw Error(Errc::DegenerateScale, "median neighbor distance is zero (coincident points)");
  return sigma;
}

double select_scale(const Matrix& points, const AffinityConfig& cfg) {
  if (cfg.scale_mode == ScaleMode::fixed) return select_scale_from_sq_distances(Matrix{}, cfg);
  return select_scale_from_sq_distances(pairwise_sq_distances(points), cfg);
}

void apply_label_override(AffinityBatch& batch, std::span<const int> labels) {
  const std::size_t m = batch.w.rows();
  if (labels.empty()) return;
  if (labels.size() != m) throw Error(Errc::LengthMismatch, "label count differs from batch size");
  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < m; ++i)
    if (labels[i] != kUnlabeled) labeled.push_back(i);
  for (std::size_t a = 0; a < labeled.size(); ++a)
    for (std::size_t b = a + 1; b < labeled.size(); ++b) {
      const std::size_t i = labeled[a], j = labeled[b];
      const double v = labels[i] == labels[j] ? 1.0 : 0.0;
      batch.w(i, j) = v;
      batch.w(j, i) = v;
    }
  for (std::size_t i = 0; i < m; ++i) {
    auto row = batch.w.row(i);
    batch.degrees[i] = std::accumulate(row.begin(), row.end(), 0.0);
  }
}

AffinityBatch affinity_from_sq_distances(const Matrix& sq_dist, std::size_t n_neighbors,
                                         double sigma, std::span<const int> labels) {
  if (!(sigma > 0.0)) throw Error(Errc::DegenerateScale, "sigma must be positive");
  const std::size_t m = sq_dist.rows();
  const NeighborLists nn = knn_from_sq_distances(sq_dist, n_neighbors);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  AffinityBatch batch{Matrix(m, m), std::vector<double>(m, 0.0)};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j : nn[i]) {
      const double v = 0.5 * std::exp(-sq_dist(i, j) * inv);
      batch.w(i, j) += v;
      batch.w(j, i) += v;
    }
  for (std::size_t i = 0; i < m; ++i) {
    auto row = batch.w.row(i);
    batch.degrees[i] = std::accumulate(row.begin(), row.end(), 0.0);
  }
  apply_label_override(batch, labels);
  return batch;
}

Matrix siamese_embed(const Mlp& model, const Matrix& points) { return model.forward(points); }

AffinityBatch gaussian_affinity(const Matrix& points, const AffinityConfig& cfg,
                                std::span<const int> labels, const Mlp* siamese) {
  cfg.validate();
  Matrix sq;
  if (cfg.distance == DistanceKind::siamese) {
    if (!siamese) throw Error(Errc::InvalidArgument, "siamese distance requested without a model");
    sq = pairwise_sq_distances(siamese_embed(*siamese, points));
  } else {
    sq = pairwise_sq_distances(points);
  }
  const double sigma = select_scale_from_sq_distances(sq, cfg);
  return affinity_from_sq_distances(sq, cfg.n_neighbors, sigma, labels);
}

double siamese_distance(const Mlp& model, std::span<const double> xi,
                        std::span<const double> xj) {
  if (xi.size() != model.input_dim() || xj.size() != model.input_dim())
    throw Error(Errc::DimensionMismatch, "point dimension does not match the Siamese network");
  Matrix x(2, model.input_dim());
  std::copy(xi.begin(), xi.end(), x.row(0).begin());
  std::copy(xj.begin(), xj.end(), x.row(1).begin());
  const Matrix z = model.forward(x);
  return std::sqrt(squared_distance(z.row(0), z.row(1)));
}

}  // namespace specnet
