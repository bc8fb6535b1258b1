#include "specnet/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "specnet/error.hpp"
#include "specnet/siamese.hpp"
#include "text_util.hpp"

namespace specnet {

namespace fs = std::filesystem;

FitResult fit(const Matrix& points, const TrainConfig& cfg, std::span<const int> partial_labels,
              const CheckpointHook& hook) {
  FitResult out;
  SpectralConfig sc = cfg.spectral;
  sc.seed = cfg.seed;
  if (cfg.use_siamese) {
    out.model.siamese = train_siamese(points, cfg.siamese, cfg.seed);
    sc.affinity.distance = DistanceKind::siamese;
  } else {
    sc.affinity.distance = DistanceKind::euclidean;
  }
  SpectralTrainOptions opts;
  opts.siamese = out.model.siamese ? &*out.model.siamese : nullptr;
  opts.labels = partial_labels;
  opts.hook = hook;
  SpectralTrainResult r = train_spectralnet(points, sc, opts);
  out.sigma = r.sigma;
  out.log = std::move(r.log);
  out.model.spectral_map = std::move(r.model);
  out.embedding = embed(out.model.spectral_map, points);

  KMeansOptions km = cfg.kmeans;
  km.seed = cfg.seed;
  out.model.centroids = kmeans(out.embedding, sc.k, km).centroids;
  out.labels = nearest_centroid(out.model.centroids, out.embedding);
  return out;
}

Labeling reveal_labels(std::span<const int> truth, double frac, std::uint64_t seed) {
  if (!(frac >= 0.0 && frac <= 1.0))
    throw Error(Errc::InvalidArgument, "label fraction must lie in [0,1]");
  const std::size_t n = truth.size();
  const auto count = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed ^ 0x1abe1ULL);
  std::shuffle(order.begin(), order.end(), rng);
  Labeling out(n, kUnlabeled);
  for (std::size_t i = 0; i < count; ++i) out[order[i]] = truth[order[i]];
  return out;
}

void save_bundle(const std::string& dir, const ClusterModel& model) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create directory '" + dir + "': " + ec.message());
  const fs::path root(dir);
  save_mlp((root / "spectral.model").string(), model.spectral_map);
  if (model.siamese) save_mlp((root / "siamese.model").string(), *model.siamese);
  else fs::remove(root / "siamese.model", ec);
  save_csv(DataMatrix{model.centroids, std::nullopt}, (root / "centroids.csv").string());
  std::ofstream m(root / "manifest.txt");
  if (!m) throw Error(Errc::IoError, "cannot write manifest in '" + dir + "'");
  m << "format = specnet-bundle 1\n"
    << "k = " << model.k() << '\n'
    << "input_dim = " << model.spectral_map.input_dim() << '\n'
    << "siamese = " << (model.siamese ? 1 : 0) << '\n';
}

ClusterModel load_bundle(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream m(root / "manifest.txt");
  if (!m) throw Error(Errc::IoError, "no manifest.txt in '" + dir + "'");
  std::map<std::string, std::string, std::less<>> kv;
  std::string line;
  while (std::getline(m, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv.emplace(std::string(detail::trim(std::string_view(line).substr(0, eq))),
               std::string(detail::trim(std::string_view(line).substr(eq + 1))));
  }
  if (kv["format"] != "specnet-bundle 1")
    throw Error(Errc::ParseError, "unsupported bundle format in '" + dir + "'");
  ClusterModel model;
  model.spectral_map = load_mlp((root / "spectral.model").string());
  if (kv["siamese"] == "1") model.siamese = load_mlp((root / "siamese.model").string());
  model.centroids = load_csv((root / "centroids.csv").string()).features;
  if (model.centroids.cols() != model.spectral_map.output_dim())
    throw Error(Errc::DimensionMismatch, "centroid width does not match the spectral map");
  if (std::to_string(model.k()) != kv["k"])
    throw Error(Errc::ParseError, "manifest k disagrees with centroids.csv");
  return model;
}

}  // namespace specnet
