#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "specnet/matrix.hpp"
#include "specnet/nn.hpp"

namespace specnet {

enum class Polarity { positive, negative };

struct PointPair {
  std::size_t i = 0;
  std::size_t j = 0;
  Polarity polarity = Polarity::positive;

  friend bool operator==(const PointPair&, const PointPair&) = default;
};

struct PairSet {
  std::vector<PointPair> pairs;

  std::size_t count(Polarity p) const;
};

struct SiameseConfig {
  std::size_t n_pos_neighbors = 2;
  /// Pair each point with one random neighbor out of its n_pos_neighbors
  /// nearest instead of with all of them.
  bool sample_one_neighbor = false;
  double margin = 1.0;
  /// Full architecture; empty means "relu:64,relu:64,linear:<embedding dim>".
  std::vector<LayerSpec> layers;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  double lr_decay = 0.1;
  int patience = 10;
  double lr_floor = 1e-8;
  std::size_t max_epochs = 60;
  double val_fraction = 0.1;

  void validate() const;
};

/// Default layer list for inputs of dimension `input_dim`.
std::vector<LayerSpec> default_siamese_layers(std::size_t input_dim);

/// Positive pairs from Euclidean nearest neighbors; an equal number of
/// negatives, each anchored at the same point as its positive counterpart and
/// drawn uniformly from points outside that anchor's neighbor set.
PairSet build_pairs(const Matrix& points, const SiameseConfig& cfg, std::uint64_t seed);

/// Positive: ‖zi−zj‖². Negative: max(margin−‖zi−zj‖, 0)². When the gradient
/// spans are non-empty they receive ∂L/∂zi and ∂L/∂zj.
double contrastive_loss(std::span<const double> zi, std::span<const double> zj, Polarity polarity,
                        double margin, std::span<double> grad_i = {},
                        std::span<double> grad_j = {});

/// Mean contrastive loss of `pairs` under `model`.
double mean_contrastive_loss(const Mlp& model, const Matrix& points,
                             std::span<const PointPair> pairs, double margin);

struct SiameseTrainStats {
  std::size_t epochs = 0;
  double final_val_loss = 0.0;
  double final_lr = 0.0;
};

/// Trains from scratch on pairs built from `points`.
Mlp train_siamese(const Matrix& points, const SiameseConfig& cfg, std::uint64_t seed,
                  SiameseTrainStats* stats = nullptr);

/// Continues training `model` on an explicit pair set.
void train_siamese_on_pairs(Mlp& model, const Matrix& points, const PairSet& pairs,
                            const SiameseConfig& cfg, std::uint64_t seed,
                            SiameseTrainStats* stats = nullptr);

}  // namespace specnet
