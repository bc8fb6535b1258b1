#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specnet/cluster.hpp"
#include "specnet/data_io.hpp"
#include "specnet/spectral.hpp"

namespace specnet {

struct FitResult {
  ClusterModel model;
  Matrix embedding;  ///< n × k, the trained map on the training points
  Labeling labels;   ///< nearest-centroid assignment of `embedding`
  std::vector<SpectralCheckpoint> log;
  double sigma = 0.0;
};

/// Siamese net (when enabled), spectral map, then k-means in embedding space.
/// `partial_labels` is empty or has one entry per point, kUnlabeled for
/// unknown. All randomness derives from cfg.seed.
FitResult fit(const Matrix& points, const TrainConfig& cfg,
              std::span<const int> partial_labels = {}, const CheckpointHook& hook = {});

/// Reveals a seeded random `frac` of `truth` and masks the rest with kUnlabeled.
Labeling reveal_labels(std::span<const int> truth, double frac, std::uint64_t seed);

/// Bundle layout inside `dir`: manifest.txt, spectral.model, siamese.model
/// (only when used) and centroids.csv.
void save_bundle(const std::string& dir, const ClusterModel& model);
ClusterModel load_bundle(const std::string& dir);

}  // namespace specnet
