#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "specnet/data_io.hpp"
#include "specnet/error.hpp"

namespace specnet {

namespace {

constexpr double kPi = std::numbers::pi;

struct Sampler {
  std::mt19937_64 rng;
  std::normal_distribution<double> gauss{0.0, 1.0};
  std::uniform_real_distribution<double> unit{0.0, 1.0};

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(rng); }
  double jitter(double sd) { return sd * gauss(rng); }
};

/// n split into `parts` groups, remainder going to the last ones.
std::vector<std::size_t> group_sizes(std::size_t n, std::size_t parts) {
  std::vector<std::size_t> out(parts, n / parts);
  for (std::size_t i = 0; i < n % parts; ++i) ++out[parts - 1 - i];
  return out;
}

}  // namespace

std::string_view dataset_kind_name(DatasetKind kind) noexcept {
  switch (kind) {
    case DatasetKind::nested_c: return "nested_c";
    case DatasetKind::concentric_circles: return "concentric_circles";
    case DatasetKind::spirals: return "spirals";
    case DatasetKind::moons: return "moons";
    case DatasetKind::blobs: return "blobs";
    case DatasetKind::blobs3d: return "blobs3d";
  }
  return "?";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  for (auto k : {DatasetKind::nested_c, DatasetKind::concentric_circles, DatasetKind::spirals,
                 DatasetKind::moons, DatasetKind::blobs, DatasetKind::blobs3d})
    if (dataset_kind_name(k) == name) return k;
  throw Error(Errc::UnknownKind, "unknown dataset kind '" + std::string(name) + "'");
}

double default_noise(DatasetKind kind) noexcept {
  switch (kind) {
    case DatasetKind::nested_c: return 0.05;
    case DatasetKind::concentric_circles: return 0.05;
    case DatasetKind::spirals: return 0.1;
    case DatasetKind::moons: return 0.05;
    case DatasetKind::blobs: return 0.2;
    case DatasetKind::blobs3d: return 0.2;
  }
  return 0.0;
}

std::size_t cluster_count(DatasetKind kind) noexcept {
  return kind == DatasetKind::blobs3d ? 3 : 2;
}

DataMatrix generate(const DatasetSpec& spec) {
  if (spec.n < 2) throw Error(Errc::InvalidArgument, "dataset needs n >= 2");
  const double noise = spec.noise.value_or(default_noise(spec.kind));
  if (!(noise >= 0.0) || !std::isfinite(noise))
    throw Error(Errc::InvalidArgument, "noise must be a nonnegative number");

  Sampler s{std::mt19937_64(spec.seed)};
  const std::size_t k = cluster_count(spec.kind);
  const std::size_t dim = spec.kind == DatasetKind::blobs3d ? 3 : 2;
  const auto sizes = group_sizes(spec.n, k);
  Matrix x(spec.n, dim);
  Labeling labels(spec.n);

  std::size_t row = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t t = 0; t < sizes[c]; ++t, ++row) {
      labels[row] = static_cast<int>(c);
      double px = 0.0, py = 0.0, pz = 0.0;
      switch (spec.kind) {
        case DatasetKind::nested_c: {
          // 270° arcs opening towards +x.
          const double r = c == 0 ? 1.0 : 2.5;
          const double a = s.uniform(0.25 * kPi, 1.75 * kPi);
          px = r * std::cos(a);
          py = r * std::sin(a);
          break;
        }
        case DatasetKind::concentric_circles: {
          const double r = c == 0 ? 1.0 : 2.5;
          const double a = s.uniform(0.0, 2.0 * kPi);
          px = r * std::cos(a);
          py = r * std::sin(a);
          break;
        }
        case DatasetKind::spirals: {
          // Two Archimedean arms, the second rotated by half a turn.
          const double t0 = s.uniform(0.0, 1.0);
          const double t = 0.5 * kPi + 2.5 * kPi * std::sqrt(t0);
          const double r = t / kPi;
          const double phase = c == 0 ? 0.0 : kPi;
          px = r * std::cos(t + phase);
          py = r * std::sin(t + phase);
          break;
        }
        case DatasetKind::moons: {
          const double a = s.uniform(0.0, kPi);
          if (c == 0) {
            px = std::cos(a);
            py = std::sin(a);
          } else {
            px = 1.0 - std::cos(a);
            py = 0.5 - std::sin(a);
          }
          break;
        }
        case DatasetKind::blobs: {
          // Uniform unit disc, so the jitter leaves no sparse tail.
          const double r = std::sqrt(s.uniform(0.0, 1.0));
          const double a = s.uniform(0.0, 2.0 * kPi);
          px = (c == 0 ? 0.0 : 10.0) + r * std::cos(a);
          py = r * std::sin(a);
          break;
        }
        case DatasetKind::blobs3d: {
          const double a = 2.0 * kPi * static_cast<double>(c) / 3.0;
          // Uniform unit ball around each center.
          const double r = std::cbrt(s.uniform(0.0, 1.0));
          const double z = s.uniform(-1.0, 1.0);
          const double phi = s.uniform(0.0, 2.0 * kPi);
          const double rho = r * std::sqrt(1.0 - z * z);
          px = 6.0 * std::cos(a) + rho * std::cos(phi);
          py = 6.0 * std::sin(a) + rho * std::sin(phi);
          pz = (c == 1 ? 4.0 : 0.0) + r * z;
          break;
        }
      }
      x(row, 0) = px + s.jitter(noise);
      x(row, 1) = py + s.jitter(noise);
      if (dim == 3) x(row, 2) = pz + s.jitter(noise);
    }
  }

  std::vector<std::size_t> order(spec.n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), s.rng);
  DataMatrix out;
  out.features = x.gather_rows(order);
  Labeling shuffled(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) shuffled[i] = labels[order[i]];
  out.labels = std::move(shuffled);
  return out;
}

}  // namespace specnet
