#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "specnet/affinity.hpp"
#include "specnet/matrix.hpp"
#include "specnet/nn.hpp"

namespace specnet {

enum class LossVariant { unnormalized, normalized };
enum class LossScaling { inverse_m, inverse_m_squared };

struct SpectralConfig {
  std::size_t k = 2;
  std::size_t batch_size = 256;
  std::size_t ortho_batch_size = 256;
  LossVariant loss_variant = LossVariant::unnormalized;
  LossScaling loss_scaling = LossScaling::inverse_m;
  /// Hidden layers; a tanh layer of width k is appended, followed by the
  /// orthonormalization map.
  std::vector<LayerSpec> hidden = {{64, Activation::relu}, {64, Activation::relu}};
  AffinityConfig affinity;
  double lr = 1e-3;
  double lr_decay = 0.1;
  int patience = 10;
  double lr_floor = 1e-8;
  std::size_t max_epochs = 500;
  /// Gradient steps per epoch; 0 means one pass over the training points.
  std::size_t batches_per_epoch = 100;
  double val_fraction = 0.1;
  /// Differentiate through the orthogonalization map as a function of the
  /// ortho batch. When false the map is a constant during the gradient step.
  bool ortho_backprop = true;
  std::uint64_t seed = 0;

  void validate(std::size_t n_points) const;
  std::vector<LayerSpec> layers() const;
};

/// Training trace entry, one per epoch.
struct SpectralCheckpoint {
  std::size_t iteration = 0;
  double loss = 0.0;      ///< mean training loss over the epoch
  double val_loss = 0.0;  ///< monitored loss driving the schedule
  double lr = 0.0;
  std::optional<double> grassmann_sq;
};

struct SpectralTrainResult {
  Mlp model;
  double sigma = 0.0;  ///< kernel scale used for every batch affinity
  std::vector<SpectralCheckpoint> log;
  std::size_t iterations = 0;
  std::size_t rank_retries = 0;
};

/// Called after each epoch with the current model; may fill grassmann_sq.
using CheckpointHook = std::function<void(const Mlp&, SpectralCheckpoint&)>;

/// Unnormalized: s·Σ W_ij‖y_i−y_j‖². Normalized: s·Σ W_ij‖y_i/d_i−y_j/d_j‖².
/// s is 1/m or 1/m². When `grad` is given it receives ∂L/∂Y.
double spectral_loss(const Matrix& y, const AffinityBatch& w, LossVariant variant,
                     LossScaling scaling, Matrix* grad = nullptr);

/// Sets the frozen output map to √m·(L⁻¹)ᵀ with L·Lᵀ = ỸᵀỸ, where Ỹ is the
/// pre-output activation on `batch`. Afterwards (1/m)·YᵀY = I on the batch.
/// Throws Error(RankDeficientBatch) when ỸᵀỸ is not positive definite.
void orthonorm_step(Mlp& model, const Matrix& batch);

struct SpectralStep {
  double loss = 0.0;
  Gradients grads;
};

/// Loss and weight gradients on `batch` for a model whose output map was set
/// by orthonorm_step(model, ortho_batch). With `through_ortho` the gradient
/// also covers the map's dependence on the weights via `ortho_batch`.
SpectralStep spectral_gradient(const Mlp& model, const Matrix& ortho_batch, const Matrix& batch,
                               const AffinityBatch& w, LossVariant variant, LossScaling scaling,
                               bool through_ortho);

/// Fresh network for the given input dimension and config.
Mlp make_spectral_net(std::size_t input_dim, const SpectralConfig& cfg);

struct SpectralTrainOptions {
  /// Switches batch affinities to distances between Siamese embeddings.
  const Mlp* siamese = nullptr;
  /// One entry per point, kUnlabeled for unknown; enables the label override.
  std::span<const int> labels;
  CheckpointHook hook;
  /// Optional permutation: logical point i lives in row row_order[i]. Batch
  /// draws are made over logical indices, so a permuted dataset trained with
  /// the matching row_order sees exactly the same batches.
  std::span<const std::size_t> row_order;
};

/// Alternating orthogonalization / gradient training.
SpectralTrainResult train_spectralnet(const Matrix& points, const SpectralConfig& cfg,
                                      const SpectralTrainOptions& options = {});

/// Row i is the trained map applied to point i.
Matrix embed(const Mlp& model, const Matrix& points);

}  // namespace specnet
