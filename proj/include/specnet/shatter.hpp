#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "specnet/matrix.hpp"

namespace specnet {

/// A point set of n = 10m points in 3-space built around m fixed grid points,
/// with a balanced S/T partition that respects a dichotomy of the grid points.
///
/// Row layout of `points`:
///   [0, m)       base grid points (Z = 0), the set being shattered
///   [m, 2m)      balancing grid points (Z = 0)
///   [2m, 4m)     lifted copies (Z = +1 for S, −1 for T)
///   [4m, 6m)     midpoints between each grid point and its copy
///   [6m, 10m)    fill points along the spanning trees of the lifted copies
struct ShatterInstance {
  std::size_t m = 0;
  std::vector<int> dichotomy;  ///< per base point: 0 → S, 1 → T
  Matrix points;               ///< 10m × 3
  std::vector<int> side;       ///< per point: 0 → S, 1 → T
  /// Largest gap along the best within-set paths (bottleneck of each side's
  /// minimum spanning tree).
  double max_path_gap = 0.0;
  /// Smallest distance between a point of S and a point of T.
  double min_cross_distance = 0.0;

  bool property_a() const noexcept { return max_path_gap < 1.0; }
  bool property_b() const noexcept { return min_cross_distance >= 1.0 - 1e-12; }

  /// The first m rows: the grid points being shattered.
  Matrix base_points() const;
};

/// Fixed base grid of m points: the first m cells, row-major, of the smallest
/// square grid holding 2m cells.
Matrix shatter_base_grid(std::size_t m);

/// Builds the instance for one dichotomy. `seed` only permutes the order in
/// which the balancing cells are handed to S and T. Throws
/// Error(ConstructionInvariantViolated) if either certificate fails.
ShatterInstance build_shatter_instance(std::size_t m, std::span<const int> dichotomy,
                                       std::uint64_t seed = 0);

/// (α, β) separation of the complete Gaussian graph at scale σ.
struct SeparationCheck {
  double alpha = 0.0;                 ///< exp(−b²/2σ²)
  double beta = 0.0;                  ///< exp(−1/2σ²)
  double min_path_affinity = 0.0;     ///< weakest edge on the within-set spanning trees
  double max_cross_affinity = 0.0;    ///< strongest S–T affinity
  bool holds() const noexcept {
    return min_path_affinity >= alpha * (1 - 1e-12) && max_cross_affinity <= beta * (1 + 1e-12) &&
           alpha > beta;
  }
};

SeparationCheck check_separation(const ShatterInstance& inst, double sigma);

/// Geometric sequence from `start` down to `stop` (inclusive when hit) with
/// the given ratio.
std::vector<double> geometric_sweep(double start = 1.0, double stop = 1e-3, double ratio = 0.7);

struct ShatterOutcome {
  bool success = false;
  std::optional<double> sigma;  ///< first σ in the sweep that realized the partition
  std::size_t sigmas_tried = 0;
};

/// Second-smallest eigenvector of the complete-graph Gaussian Laplacian,
/// thresholded at zero, compared with the S/T partition up to global sign.
bool fiedler_sign_matches(const ShatterInstance& inst, double sigma);

/// Walks the sweep in order and stops at the first σ that realizes the
/// partition. A failed sweep is reported, not thrown.
ShatterOutcome verify_shattering(const ShatterInstance& inst, std::span<const double> sweep);

}  // namespace specnet
