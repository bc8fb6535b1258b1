#include "specnet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "specnet/error.hpp"
#include "specnet/linalg.hpp"

namespace specnet {

void SpectralConfig::validate(std::size_t n_points) const {
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  if (batch_size < k || ortho_batch_size < k)
    throw Error(Errc::InvalidArgument, "batch sizes must be at least k");
  if (batch_size <= affinity.n_neighbors)
    throw Error(Errc::InvalidArgument, "batch size must exceed n_neighbors");
  if (n_points && (batch_size > n_points || ortho_batch_size > n_points))
    throw Error(Errc::TooFewPoints, "batch sizes exceed the number of training points");
  if (!(lr > 0.0)) throw Error(Errc::InvalidArgument, "lr must be positive");
  if (!(lr_decay > 0.0 && lr_decay < 1.0))
    throw Error(Errc::InvalidArgument, "lr decay must lie in (0,1)");
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw Error(Errc::InvalidArgument, "validation fraction must lie in [0,1)");
  affinity.validate();
}

std::vector<LayerSpec> SpectralConfig::layers() const {
  std::vector<LayerSpec> l = hidden;
  l.push_back({k, Activation::tanh});
  return l;
}

double spectral_loss(const Matrix& y, const AffinityBatch& w, LossVariant variant,
                     LossScaling scaling, Matrix* grad) {
  const std::size_t m = y.rows();
  const std::size_t k = y.cols();
  if (w.w.rows() != m || w.w.cols() != m || w.degrees.size() != m)
    throw Error(Errc::DimensionMismatch, "affinity batch does not match embedding rows");

  Matrix u = y;
  if (variant == LossVariant::normalized) {
    for (std::size_t i = 0; i < m; ++i) {
      if (!(w.degrees[i] > 0.0))
        throw Error(Errc::ZeroDegree, "point " + std::to_string(i) + " has zero degree");
      for (double& v : u.row(i)) v /= w.degrees[i];
    }
  }
  const double md = static_cast<double>(m);
  const double s = scaling == LossScaling::inverse_m ? 1.0 / md : 1.0 / (md * md);

  if (grad) *grad = Matrix(m, k);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto ui = u.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double wij = w.w(i, j);
      const double wsum = wij + w.w(j, i);
      if (wij == 0.0 && wsum == 0.0) continue;
      auto uj = u.row(j);
      double d2 = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double diff = ui[c] - uj[c];
        d2 += diff * diff;
        if (grad) (*grad)(i, c) += 2.0 * s * wsum * diff;
      }
      total += wij * d2;
    }
  }
  if (grad && variant == LossVariant::normalized)
    for (std::size_t i = 0; i < m; ++i)
      for (double& v : grad->row(i)) v /= w.degrees[i];
  return s * total;
}

void orthonorm_step(Mlp& model, const Matrix& batch) {
  const Matrix pre = model.forward_pre_output(batch);
  const std::size_t m = pre.rows();
  Matrix l;
  try {
    l = cholesky(matmul_tn(pre, pre));
  } catch (const Error& e) {
    if (e.code() != Errc::NotPositiveDefinite) throw;
    throw Error(Errc::RankDeficientBatch,
                "pre-output Gram matrix of a " + std::to_string(m) + "-point batch is singular");
  }
  Matrix f = lower_triangular_inverse(l).transpose();
  const double scale = std::sqrt(static_cast<double>(m));
  for (double& v : f.data()) v *= scale;
  model.set_frozen_output(std::move(f));
}

SpectralStep spectral_gradient(const Mlp& model, const Matrix& ortho_batch, const Matrix& batch,
                               const AffinityBatch& w, LossVariant variant, LossScaling scaling,
                               bool through_ortho) {
  if (!model.frozen_output()) throw Error(Errc::InvalidArgument, "output map is not set");
  SpectralStep step;
  ForwardCache cache;
  const Matrix y = model.forward(batch, cache);
  Matrix grad_y;
  step.loss = spectral_loss(y, w, variant, scaling, &grad_y);
  step.grads = model.backward(cache, grad_y);
  if (!through_ortho) return step;

  // The loss is tr(Yᵀ Q Y) with Y = Ỹ F and F Fᵀ = m A⁻¹, A = Ỹoᵀ Ỹo. With
  // C = Ỹᵀ ∂L/∂Y this gives ∂L/∂A = −F Fᵀ C Fᵀ / 2m.
  const Matrix& f = *model.frozen_output();
  const double m = static_cast<double>(ortho_batch.rows());
  const Matrix c = matmul_tn(cache.outputs.back(), grad_y);
  Matrix da = matmul(matmul(f, matmul_tn(f, c)), f.transpose());
  const std::size_t k = da.rows();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      const double v = -(da(i, j) + da(j, i)) / (4.0 * m);
      da(i, j) = da(j, i) = v;
    }
  ForwardCache ocache;
  model.forward(ortho_batch, ocache);
  Matrix grad_pre = matmul(ocache.outputs.back(), da);
  for (double& v : grad_pre.data()) v *= 2.0;
  const Gradients extra = model.backward_pre_output(ocache, grad_pre);
  for (std::size_t l = 0; l < extra.weight.size(); ++l) {
    step.grads.weight[l] = step.grads.weight[l] + extra.weight[l];
    for (std::size_t j = 0; j < extra.bias[l].size(); ++j) step.grads.bias[l][j] += extra.bias[l][j];
  }
  return step;
}

Mlp make_spectral_net(std::size_t input_dim, const SpectralConfig& cfg) {
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  return Mlp(input_dim, cfg.layers(), rng);
}

Matrix embed(const Mlp& model, const Matrix& points) { return model.forward(points); }

namespace {

/// Uniform draws of `count` distinct entries from a pool, by partial
/// Fisher–Yates over a persistent copy of the pool.
class BatchSampler {
 public:
  BatchSampler(std::vector<std::size_t> pool, std::mt19937_64& rng)
      : pool_(std::move(pool)), rng_(rng) {}

  std::vector<std::size_t> draw(std::size_t count) {
    const std::size_t n = pool_.size();
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(pool_[i], pool_[pick(rng_)]);
    }
    return {pool_.begin(), pool_.begin() + static_cast<std::ptrdiff_t>(count)};
  }

 private:
  std::vector<std::size_t> pool_;
  std::mt19937_64& rng_;
};

}  // namespace

SpectralTrainResult train_spectralnet(const Matrix& points, const SpectralConfig& config,
                                      const SpectralTrainOptions& options) {
  SpectralConfig cfg = config;
  const std::size_t n = points.rows();
  if (!options.labels.empty() && options.labels.size() != n)
    throw Error(Errc::LengthMismatch, "labels must have one entry per point");
  if (!options.row_order.empty() && options.row_order.size() != n)
    throw Error(Errc::LengthMismatch, "row_order must have one entry per point");
  if (options.siamese && options.siamese->input_dim() != points.cols())
    throw Error(Errc::DimensionMismatch, "Siamese network input does not match data width");

  std::mt19937_64 rng(cfg.seed);
  auto row_of = [&](std::size_t logical) {
    return options.row_order.empty() ? logical : options.row_order[logical];
  };

  std::vector<std::size_t> logical(n);
  std::iota(logical.begin(), logical.end(), 0);
  std::shuffle(logical.begin(), logical.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(n));
  if (n_val <= cfg.affinity.n_neighbors) n_val = 0;
  // Split over logical indices, then map to physical rows, so draws do not
  // depend on where a point sits in the matrix.
  std::vector<std::size_t> val_rows(logical.begin(), logical.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_rows(logical.begin() + static_cast<std::ptrdiff_t>(n_val), logical.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  for (std::size_t& r : val_rows) r = row_of(r);
  for (std::size_t& r : train_rows) r = row_of(r);

  // Small datasets train on full-size batches.
  cfg.batch_size = std::min(cfg.batch_size, train_rows.size());
  cfg.ortho_batch_size = std::min(cfg.ortho_batch_size, train_rows.size());
  cfg.validate(train_rows.size());

  const Matrix space = options.siamese ? siamese_embed(*options.siamese, points) : points;

  auto batch_labels = [&](std::span<const std::size_t> rows) {
    std::vector<int> out;
    if (options.labels.empty()) return out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(options.labels[r]);
    return out;
  };

  SpectralTrainResult result;
  result.model = make_spectral_net(points.cols(), cfg);
  Mlp& model = result.model;

  BatchSampler sampler(train_rows, rng);
  {
    AffinityConfig scale_cfg = cfg.affinity;
    const auto sample = sampler.draw(std::min(cfg.batch_size, train_rows.size()));
    result.sigma = scale_cfg.scale_mode == ScaleMode::fixed
                       ? *scale_cfg.fixed_sigma
                       : select_scale_from_sq_distances(
                             pairwise_sq_distances(space.gather_rows(sample)), scale_cfg);
  }

  std::optional<AffinityBatch> val_w;
  Matrix val_points;
  if (!val_rows.empty()) {
    val_points = points.gather_rows(val_rows);
    const auto vl = batch_labels(val_rows);
    val_w = affinity_from_sq_distances(pairwise_sq_distances(space.gather_rows(val_rows)),
                                       cfg.affinity.n_neighbors, result.sigma, vl);
  }

  RmspropState opt = RmspropState::for_model(model);
  LrSchedule sched{cfg.lr, cfg.lr_decay, cfg.patience, cfg.lr_floor};
  std::vector<double> history;
  const std::size_t iters_per_epoch =
      cfg.batches_per_epoch ? cfg.batches_per_epoch
                            : std::max<std::size_t>(1, train_rows.size() / cfg.batch_size);
  std::size_t iteration = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t it = 0; it < iters_per_epoch; ++it, ++iteration) {
      Matrix ortho_batch;
      for (int attempt = 0;; ++attempt) {
        try {
          ortho_batch = points.gather_rows(sampler.draw(cfg.ortho_batch_size));
          orthonorm_step(model, ortho_batch);
          break;
        } catch (const Error& e) {
          if (e.code() != Errc::RankDeficientBatch) throw;
          if (attempt >= 1)
            throw Error(Errc::RankDeficientBatch,
                        "orthogonalization failed twice at iteration " +
                            std::to_string(iteration));
          ++result.rank_retries;
        }
      }

      const auto rows = sampler.draw(cfg.batch_size);
      const auto bl = batch_labels(rows);
      const AffinityBatch w = affinity_from_sq_distances(
          pairwise_sq_distances(space.gather_rows(rows)), cfg.affinity.n_neighbors,
          result.sigma, bl);
      const SpectralStep step =
          spectral_gradient(model, ortho_batch, points.gather_rows(rows), w, cfg.loss_variant,
                            cfg.loss_scaling, cfg.ortho_backprop);
      if (!std::isfinite(step.loss))
        throw Error(Errc::NonFiniteLoss, "loss is not finite at iteration " +
                                             std::to_string(iteration));
      epoch_loss += step.loss;
      rmsprop_step(model, step.grads, opt, sched.lr);
    }

    SpectralCheckpoint cp;
    cp.iteration = iteration;
    cp.loss = epoch_loss / static_cast<double>(iters_per_epoch);
    cp.val_loss = val_w ? spectral_loss(model.forward(val_points), *val_w, cfg.loss_variant,
                                        cfg.loss_scaling)
                        : cp.loss;
    if (!std::isfinite(cp.val_loss))
      throw Error(Errc::NonFiniteLoss, "validation loss is not finite at iteration " +
                                           std::to_string(iteration));
    cp.lr = sched.lr;
    if (options.hook) options.hook(model, cp);
    result.log.push_back(cp);

    history.push_back(cp.val_loss);
    const ScheduleUpdate u = schedule_update(sched, history);
    sched = u.schedule;
    if (u.stop) break;
  }
  result.iterations = iteration;
  return result;
}

}  // namespace specnet
