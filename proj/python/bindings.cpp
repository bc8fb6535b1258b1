#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "specnet/cluster.hpp"
#include "specnet/data_io.hpp"
#include "specnet/error.hpp"
#include "specnet/linalg.hpp"
#include "specnet/oracle.hpp"
#include "specnet/pipeline.hpp"
#include "specnet/shatter.hpp"

namespace py = pybind11;
using namespace specnet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw Error(Errc::DimensionMismatch, "expected a 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Labeling to_labels(const IntArray& a) {
  if (a.ndim() != 1) throw Error(Errc::DimensionMismatch, "expected a 1-d label array");
  return Labeling(a.data(), a.data() + a.size());
}

py::array_t<int> to_array(const Labeling& l) {
  py::array_t<int> out(static_cast<py::ssize_t>(l.size()));
  std::copy(l.begin(), l.end(), out.mutable_data());
  return out;
}

TrainConfig make_config(std::size_t k, bool use_siamese, std::uint64_t seed, const py::dict& overrides) {
  TrainConfig cfg;
  for (auto item : overrides)
    apply_config_value(cfg, py::str(item.first).cast<std::string>(), py::str(item.second).cast<std::string>());
  cfg.spectral.k = k;
  cfg.use_siamese = use_siamese;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_specnet, m) {
  m.doc() = "SpectralNet: neural spectral clustering";

  static py::exception<Error> error(m, "SpecnetError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def(
      "generate",
      [](const std::string& kind, std::size_t n, std::optional<double> noise, std::uint64_t seed) {
        const DataMatrix d = generate(DatasetSpec{parse_dataset_kind(kind), n, noise, seed});
        return py::make_tuple(to_array(d.features), to_array(*d.labels));
      },
      py::arg("kind") = "nested_c", py::arg("n") = 1500, py::arg("noise") = py::none(), py::arg("seed") = 0,
      "Synthetic dataset; returns (points, labels).");

  py::class_<ClusterModel>(m, "Model")
      .def_property_readonly("k", &ClusterModel::k)
      .def_property_readonly("has_siamese", [](const ClusterModel& c) { return c.siamese.has_value(); })
      .def_property_readonly("centroids", [](const ClusterModel& c) { return to_array(c.centroids); })
      .def(
          "embed", [](const ClusterModel& c, const Array& x) { return to_array(embed(c.spectral_map, to_matrix(x))); },
          py::arg("points"))
      .def(
          "predict", [](const ClusterModel& c, const Array& x) { return to_array(assign(c, to_matrix(x))); },
          py::arg("points"), "Nearest-centroid cluster of each embedded point.")
      .def("save", [](const ClusterModel& c, const std::string& dir) { save_bundle(dir, c); }, py::arg("dir"));

  m.def("load_model", &load_bundle, py::arg("dir"));

  m.def(
      "fit",
      [](const Array& points, std::size_t k, bool use_siamese, std::uint64_t seed, std::optional<IntArray> labels,
         const py::dict& config) {
        const Matrix x = to_matrix(points);
        const TrainConfig cfg = make_config(k, use_siamese, seed, config);
        Labeling partial;
        if (labels) partial = to_labels(*labels);
        FitResult r;
        {
          py::gil_scoped_release release;
          r = fit(x, cfg, partial);
        }
        py::list log;
        for (const SpectralCheckpoint& c : r.log)
          log.append(py::dict(py::arg("iter") = c.iteration, py::arg("loss") = c.loss,
                              py::arg("val_loss") = c.val_loss, py::arg("lr") = c.lr,
                              py::arg("grassmann_sq") = c.grassmann_sq ? py::cast(*c.grassmann_sq) : py::none()));
        py::dict out;
        out["model"] = r.model;
        out["labels"] = to_array(r.labels);
        out["embedding"] = to_array(r.embedding);
        out["sigma"] = r.sigma;
        out["log"] = log;
        return out;
      },
      py::arg("points"), py::arg("k") = 2, py::arg("use_siamese") = true, py::arg("seed") = 0,
      py::arg("labels") = py::none(), py::arg("config") = py::dict(),
      "Train SpectralNet. `labels` may hold -1 for unknown points; `config` takes the config-file keys.");

  m.def("reveal_labels", [](const IntArray& truth, double frac, std::uint64_t seed) {
    return to_array(reveal_labels(to_labels(truth), frac, seed));
  }, py::arg("truth"), py::arg("frac"), py::arg("seed") = 0);

  m.def(
      "spectral_clustering",
      [](const Array& points, std::size_t k, std::size_t n_neighbors, std::size_t scale_k, std::uint64_t seed) {
        AffinityConfig a;
        a.n_neighbors = n_neighbors;
        a.scale_k = scale_k;
        KMeansOptions km;
        km.seed = seed;
        const SpectralOracle o = exact_spectral_clustering(to_matrix(points), k, a, km);
        return py::make_tuple(to_array(o.labels), to_array(o.eigenvectors), o.eigenvalues);
      },
      py::arg("points"), py::arg("k") = 2, py::arg("n_neighbors") = AffinityConfig{}.n_neighbors,
      py::arg("scale_k") = AffinityConfig{}.scale_k, py::arg("seed") = 0,
      "Exact spectral clustering; returns (labels, eigenvectors, eigenvalues).");

  m.def(
      "kmeans",
      [](const Array& points, std::size_t k, std::uint64_t seed) {
        KMeansOptions o;
        o.seed = seed;
        const KMeansResult r = kmeans(to_matrix(points), k, o);
        return py::make_tuple(to_array(r.labels), to_array(r.centroids));
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0);

  m.def("acc", [](const IntArray& t, const IntArray& p) { return acc(to_labels(t), to_labels(p)); },
        py::arg("truth"), py::arg("pred"));
  m.def("nmi", [](const IntArray& t, const IntArray& p) { return nmi(to_labels(t), to_labels(p)); },
        py::arg("truth"), py::arg("pred"));

  m.def("cholesky_qr", [](const Array& a) { return to_array(cholesky_qr(to_matrix(a))); }, py::arg("a"));
  m.def("grassmann_sq", [](const Array& a, const Array& b) { return grassmann_sq(to_matrix(a), to_matrix(b)); },
        py::arg("a"), py::arg("b"));

  m.def(
      "shatter",
      [](std::size_t m_points, std::vector<int> dichotomy, std::uint64_t seed) {
        const ShatterInstance inst = build_shatter_instance(m_points, dichotomy, seed);
        const std::vector<double> sweep = geometric_sweep();
        const ShatterOutcome o = verify_shattering(inst, sweep);
        py::dict out;
        out["points"] = to_array(inst.points);
        out["side"] = to_array(Labeling(inst.side));
        out["success"] = o.success;
        out["sigma"] = o.sigma ? py::cast(*o.sigma) : py::none();
        out["max_path_gap"] = inst.max_path_gap;
        out["min_cross_distance"] = inst.min_cross_distance;
        return out;
      },
      py::arg("m"), py::arg("dichotomy"), py::arg("seed") = 0,
      "Build the shattering instance for one dichotomy and sweep sigma.");
}
