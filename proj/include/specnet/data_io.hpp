#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specnet/cluster.hpp"
#include "specnet/matrix.hpp"
#include "specnet/siamese.hpp"
#include "specnet/spectral.hpp"

namespace specnet {

enum class DatasetKind { nested_c, concentric_circles, spirals, moons, blobs, blobs3d };

std::string_view dataset_kind_name(DatasetKind kind) noexcept;
/// Throws Error(UnknownKind).
DatasetKind parse_dataset_kind(std::string_view name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::nested_c;
  std::size_t n = 1500;
  /// Standard deviation of the Gaussian jitter per coordinate; the per-kind
  /// default when empty.
  std::optional<double> noise;
  std::uint64_t seed = 0;
};

double default_noise(DatasetKind kind) noexcept;
std::size_t cluster_count(DatasetKind kind) noexcept;

struct DataMatrix {
  Matrix features;
  std::optional<Labeling> labels;
};

/// Deterministic in the seed. Rows come out shuffled.
DataMatrix generate(const DatasetSpec& spec);

/// Header `f0,...,f{d-1}` with an optional trailing `label` column.
DataMatrix load_csv(const std::string& path);
DataMatrix read_csv(std::istream& in);
void save_csv(const DataMatrix& data, const std::string& path);
void write_csv(std::ostream& out, const DataMatrix& data);

/// Everything a training run needs.
struct TrainConfig {
  SpectralConfig spectral;
  SiameseConfig siamese;
  bool use_siamese = true;
  KMeansOptions kmeans;
  /// Fraction of ground-truth labels handed to the affinity override.
  double labels_frac = 0.0;
  std::uint64_t seed = 0;
};

/// Flat `key = value` (or `key: value`) lines with `#` comments. Missing keys
/// keep their defaults. Throws UnknownKey / TypeError naming the line.
TrainConfig load_config(const std::string& path);
TrainConfig parse_config(std::istream& in);
/// Applies a single setting; the building block of the parser and of CLI overrides.
void apply_config_value(TrainConfig& cfg, std::string_view key, std::string_view value);
/// Inverse of the parser: every key with its current value.
std::string format_config(const TrainConfig& cfg);

}  // namespace specnet
