// specnet: generate data, train SpectralNet models, assign clusters, evaluate,
// run the exact oracle and the shattering demo.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "specnet/cluster.hpp"
#include "specnet/data_io.hpp"
#include "specnet/error.hpp"
#include "specnet/oracle.hpp"
#include "specnet/pipeline.hpp"
#include "specnet/shatter.hpp"

namespace fs = std::filesystem;
using namespace specnet;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_labels(const std::string& path, const Labeling& labels) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open '" + path + "' for writing");
  out << "label\n";
  for (int l : labels) out << l << '\n';
  if (!out) throw Error(Errc::IoError, "write to '" + path + "' failed");
}

// Either a one-column `label` file from predict/oracle or a data CSV with a
// label column.
Labeling read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "' for reading");
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != "label") {
    in.clear();
    in.seekg(0);
    DataMatrix d = read_csv(in);
    if (!d.labels) throw Error(Errc::ParseError, "'" + path + "' has no label column");
    return *d.labels;
  }
  Labeling out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != line.size())
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": bad label '" + line + "'");
    out.push_back(v);
  }
  return out;
}

void write_matrix(const std::string& path, const Matrix& m) {
  save_csv(DataMatrix{m, std::nullopt}, path);
}

void write_metrics(const std::string& path, const std::vector<SpectralCheckpoint>& log) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open '" + path + "' for writing");
  out << "iter,loss,val_loss,lr,grassmann_sq\n";
  for (const SpectralCheckpoint& c : log) {
    out << c.iteration << ',' << fmt(c.loss) << ',' << fmt(c.val_loss) << ',' << fmt(c.lr) << ',';
    if (c.grassmann_sq) out << fmt(*c.grassmann_sq);
    out << '\n';
  }
}

TrainConfig base_config(const std::string& config_path, const std::vector<std::string>& sets) {
  TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_config(config_path);
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
    apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

// Affinity flags shared by oracle and grassmann.
struct AffinityFlags {
  std::size_t n_neighbors = AffinityConfig{}.n_neighbors;
  std::size_t scale_k = AffinityConfig{}.scale_k;
  double sigma = 0.0;

  void add(CLI::App* app) {
    app->add_option("--n-neighbors", n_neighbors, "Neighbors kept per point in W")->capture_default_str();
    app->add_option("--scale-k", scale_k, "Neighbor rank whose median distance sets sigma")
        ->capture_default_str();
    app->add_option("--sigma", sigma, "Fixed kernel scale (overrides --scale-k)");
  }
  AffinityConfig get() const {
    AffinityConfig a;
    a.n_neighbors = n_neighbors;
    a.scale_k = scale_k;
    if (sigma > 0.0) {
      a.scale_mode = ScaleMode::fixed;
      a.fixed_sigma = sigma;
    }
    return a;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SpectralNet: neural spectral clustering"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset CSV with labels");
  std::string gen_kind = "nested_c", gen_out;
  std::size_t gen_n = 1500;
  double gen_noise = -1.0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kind", gen_kind,
                  "nested_c, concentric_circles, spirals, moons, blobs or blobs3d")
      ->capture_default_str();
  gen->add_option("--n", gen_n, "Number of points")->capture_default_str();
  gen->add_option("--noise", gen_noise, "Gaussian jitter std (default depends on kind)");
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a model bundle on a data CSV");
  std::string tr_data, tr_out, tr_config, tr_metrics, tr_embedding, tr_labels;
  std::size_t tr_k = 0;
  bool tr_no_siamese = false, tr_grassmann = false;
  double tr_labels_frac = -1.0;
  std::uint64_t tr_seed = 0;
  std::vector<std::string> tr_sets;
  train->add_option("--data", tr_data, "Training CSV")->required();
  train->add_option("--out", tr_out, "Directory for the model bundle")->required();
  train->add_option("--k", tr_k, "Number of clusters (overrides the config)");
  train->add_option("--config", tr_config, "key = value config file");
  train->add_option("--set", tr_sets, "Config override key=value, repeatable");
  train->add_flag("--no-siamese", tr_no_siamese, "Use Euclidean distances for the affinity");
  train->add_option("--labels-frac", tr_labels_frac,
                    "Fraction of ground-truth labels revealed to the affinity");
  auto* tr_seed_opt = train->add_option("--seed", tr_seed, "Random seed (overrides the config)");
  train->add_option("--metrics", tr_metrics, "Metrics CSV (default <out>/metrics.csv)");
  train->add_option("--embedding", tr_embedding, "Embedding CSV (default <out>/embedding.csv)");
  train->add_option("--labels", tr_labels, "Training labels CSV (default <out>/labels.csv)");
  train->add_flag("--grassmann", tr_grassmann,
                  "Log the Grassmann distance to the exact eigenvectors every epoch (dense, slow)");

  // predict
  auto* pred = app.add_subcommand("predict", "Assign clusters to new points with a trained bundle");
  std::string pr_model, pr_data, pr_out, pr_embedding;
  pred->add_option("--model", pr_model, "Model bundle directory")->required();
  pred->add_option("--data", pr_data, "Points CSV")->required();
  pred->add_option("--out", pr_out, "Labels CSV")->required();
  pred->add_option("--embedding", pr_embedding, "Also write the embedding CSV");

  // eval
  auto* ev = app.add_subcommand("eval", "Print ACC and NMI of predicted against true labels");
  std::string ev_truth, ev_pred;
  ev->add_option("--truth", ev_truth, "CSV with a label column")->required();
  ev->add_option("--pred", ev_pred, "Predicted labels CSV")->required();

  // oracle
  auto* orc = app.add_subcommand("oracle", "Exact spectral clustering by dense eigendecomposition");
  std::string or_data, or_out, or_eig;
  std::size_t or_k = 2;
  std::uint64_t or_seed = 0;
  AffinityFlags or_aff;
  orc->add_option("--data", or_data, "Points CSV")->required();
  orc->add_option("--k", or_k, "Number of clusters")->capture_default_str();
  orc->add_option("--out", or_out, "Labels CSV")->required();
  orc->add_option("--eigenvectors", or_eig, "Bottom-k eigenvector CSV");
  orc->add_option("--seed", or_seed, "k-means seed")->capture_default_str();
  or_aff.add(orc);

  // shatter
  auto* sh = app.add_subcommand("shatter", "Check that the thresholded Fiedler vector realizes dichotomies");
  std::size_t sh_m = 4;
  bool sh_exhaustive = false;
  std::uint64_t sh_mask = 0, sh_seed = 0;
  std::string sh_out;
  sh->add_option("--m", sh_m, "Number of base grid points")->capture_default_str();
  auto* sh_ex = sh->add_flag("--exhaustive", sh_exhaustive, "Try all 2^m dichotomies");
  sh->add_option("--dichotomy", sh_mask, "Bit i set puts base point i in T")
      ->capture_default_str()
      ->excludes(sh_ex);
  sh->add_option("--seed", sh_seed, "Balancing-point order seed")->capture_default_str();
  sh->add_option("--out", sh_out, "Report CSV (default stdout)");

  // grassmann
  auto* gr = app.add_subcommand("grassmann", "Grassmann distance between a model and the exact eigenvectors");
  std::string gr_model, gr_data;
  AffinityFlags gr_aff;
  gr->add_option("--model", gr_model, "Model bundle directory")->required();
  gr->add_option("--data", gr_data, "Points CSV")->required();
  gr_aff.add(gr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      DatasetSpec s;
      s.kind = parse_dataset_kind(gen_kind);
      s.n = gen_n;
      if (gen_noise >= 0.0) s.noise = gen_noise;
      s.seed = gen_seed;
      save_csv(generate(s), gen_out);
    } else if (*train) {
      TrainConfig cfg = base_config(tr_config, tr_sets);
      if (tr_k) cfg.spectral.k = tr_k;
      if (tr_no_siamese) cfg.use_siamese = false;
      if (tr_labels_frac >= 0.0) cfg.labels_frac = tr_labels_frac;
      if (tr_seed_opt->count()) cfg.seed = tr_seed;
      const DataMatrix d = load_csv(tr_data);
      Labeling partial;
      if (cfg.labels_frac > 0.0) {
        if (!d.labels) throw Error(Errc::InvalidArgument, "--labels-frac needs a label column in the data");
        partial = reveal_labels(*d.labels, cfg.labels_frac, cfg.seed);
      }
      CheckpointHook hook;
      Matrix eigvecs;
      if (tr_grassmann) {
        AffinityConfig a = cfg.spectral.affinity;
        a.distance = DistanceKind::euclidean;
        eigvecs = exact_spectral_clustering(d.features, cfg.spectral.k, a).eigenvectors;
        hook = [&](const Mlp& m, SpectralCheckpoint& c) {
          c.grassmann_sq = grassmann_to_subspace(m, d.features, eigvecs);
        };
      }
      const FitResult r = fit(d.features, cfg, partial, hook);
      save_bundle(tr_out, r.model);
      const fs::path root(tr_out);
      write_metrics(tr_metrics.empty() ? (root / "metrics.csv").string() : tr_metrics, r.log);
      write_matrix(tr_embedding.empty() ? (root / "embedding.csv").string() : tr_embedding, r.embedding);
      write_labels(tr_labels.empty() ? (root / "labels.csv").string() : tr_labels, r.labels);
      std::ofstream(root / "config.txt") << format_config(cfg);
      if (d.labels)
        std::cout << "train acc=" << fmt(acc(*d.labels, r.labels)) << " nmi=" << fmt(nmi(*d.labels, r.labels))
                  << '\n';
    } else if (*pred) {
      const ClusterModel m = load_bundle(pr_model);
      const DataMatrix d = load_csv(pr_data);
      write_labels(pr_out, assign(m, d.features));
      if (!pr_embedding.empty()) write_matrix(pr_embedding, embed(m.spectral_map, d.features));
    } else if (*ev) {
      const Labeling truth = read_labels(ev_truth);
      const Labeling p = read_labels(ev_pred);
      std::cout << "acc=" << fmt(acc(truth, p)) << " nmi=" << fmt(nmi(truth, p)) << '\n';
    } else if (*orc) {
      const DataMatrix d = load_csv(or_data);
      KMeansOptions km;
      km.seed = or_seed;
      const SpectralOracle o = exact_spectral_clustering(d.features, or_k, or_aff.get(), km);
      write_labels(or_out, o.labels);
      if (!or_eig.empty()) write_matrix(or_eig, o.eigenvectors);
    } else if (*sh) {
      if (sh_m == 0 || sh_m > 20) throw CLI::ValidationError("--m", "must lie in [1, 20]");
      std::vector<std::uint64_t> masks;
      if (sh_exhaustive)
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << sh_m); ++mask) masks.push_back(mask);
      else
        masks.push_back(sh_mask);
      const std::vector<double> sweep = geometric_sweep();
      std::ofstream file;
      if (!sh_out.empty()) {
        file.open(sh_out);
        if (!file) throw Error(Errc::IoError, "cannot open '" + sh_out + "' for writing");
      }
      std::ostream& out = sh_out.empty() ? std::cout : file;
      out << "m,dichotomy,sigma,success\n";
      std::size_t ok = 0;
      for (std::uint64_t mask : masks) {
        std::vector<int> bits(sh_m);
        for (std::size_t i = 0; i < sh_m; ++i) bits[i] = static_cast<int>((mask >> i) & 1u);
        const ShatterOutcome res = verify_shattering(build_shatter_instance(sh_m, bits, sh_seed), sweep);
        ok += res.success;
        out << sh_m << ',' << mask << ',' << (res.sigma ? fmt(*res.sigma) : "") << ','
            << (res.success ? 1 : 0) << '\n';
      }
      std::cerr << ok << '/' << masks.size() << " dichotomies realized\n";
      if (ok != masks.size()) return 1;
    } else if (*gr) {
      const ClusterModel m = load_bundle(gr_model);
      const DataMatrix d = load_csv(gr_data);
      AffinityConfig a = gr_aff.get();
      const Mlp* siamese = nullptr;
      if (m.siamese) {
        a.distance = DistanceKind::siamese;
        siamese = &*m.siamese;
      }
      const SpectralOracle o = exact_spectral_clustering(d.features, m.k(), a, {}, siamese);
      std::cout << fmt(grassmann_to_subspace(m.spectral_map, d.features, o.eigenvectors)) << '\n';
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
