#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "specnet/error.hpp"
#include "specnet/linalg.hpp"
#include "specnet/oracle.hpp"
#include "specnet/spectral.hpp"
#include "test_support.hpp"

using namespace specnet;
using specnet::testing::central_difference;
using specnet::testing::ortho_defect;
using specnet::testing::random_matrix;
using specnet::testing::random_symmetric_affinity;
using specnet::testing::rel_err;

namespace {

AffinityBatch batch_of(const Matrix& w) {
  AffinityBatch b{w, std::vector<double>(w.rows(), 0.0)};
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) b.degrees[i] += w(i, j);
  return b;
}

// 2s·tr(Yᵀ(D−W)Y) computed with explicit loops.
double trace_form(const Matrix& y, const Matrix& w, double s) {
  const std::size_t m = y.rows();
  double t = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j) d += w(i, j);
    for (std::size_t j = 0; j < m; ++j) {
      const double lij = (i == j ? d : 0.0) - w(i, j);
      for (std::size_t c = 0; c < y.cols(); ++c) t += y(i, c) * lij * y(j, c);
    }
  }
  return 2.0 * s * t;
}

Matrix two_blobs(std::size_t per, double gap, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.3);
  Matrix x(2 * per, 2);
  for (std::size_t i = 0; i < 2 * per; ++i) {
    x(i, 0) = (i % 2 ? gap : 0.0) + g(rng);
    x(i, 1) = g(rng);
  }
  return x;
}

SpectralConfig small_config() {
  SpectralConfig cfg;
  cfg.k = 2;
  cfg.hidden = parse_layers("relu:16,relu:16");
  cfg.batch_size = 64;
  cfg.ortho_batch_size = 64;
  cfg.max_epochs = 20;
  cfg.batches_per_epoch = 20;
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST_CASE("spectral loss examples") {
  const AffinityBatch w = batch_of(Matrix{{0.0, 1.0}, {1.0, 0.0}});
  const Matrix y{{0.0}, {1.0}};
  CHECK(spectral_loss(y, w, LossVariant::unnormalized, LossScaling::inverse_m_squared) ==
        doctest::Approx(0.5));
  CHECK(trace_form(y, w.w, 0.25) == doctest::Approx(0.5));
  CHECK(spectral_loss(y, w, LossVariant::unnormalized, LossScaling::inverse_m) ==
        doctest::Approx(1.0));
  CHECK(spectral_loss(Matrix{{3.0}, {3.0}}, w, LossVariant::unnormalized, LossScaling::inverse_m) ==
        0.0);

  const AffinityBatch isolated = batch_of(Matrix{{0.0, 0.0}, {0.0, 0.0}});
  try {
    spectral_loss(y, isolated, LossVariant::normalized, LossScaling::inverse_m);
    FAIL("expected ZeroDegree");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroDegree);
  }
  CHECK_THROWS_AS(spectral_loss(Matrix{{1.0}}, w, LossVariant::unnormalized, LossScaling::inverse_m),
                  Error);
}

TEST_CASE("loss equals the trace form") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 3 + trial % 20;
    const Matrix y = random_matrix(m, 1 + trial % 4, rng);
    const Matrix w = random_symmetric_affinity(m, rng);
    const double s = 1.0 / static_cast<double>(m * m);
    const double loss =
        spectral_loss(y, batch_of(w), LossVariant::unnormalized, LossScaling::inverse_m_squared);
    CHECK(std::abs(loss - trace_form(y, w, s)) < 1e-10 * std::max(1.0, std::abs(loss)));
  }
}

TEST_CASE("loss gradient wrt Y matches central differences") {
  std::mt19937_64 rng(23);
  for (auto variant : {LossVariant::unnormalized, LossVariant::normalized}) {
    for (int trial = 0; trial < 10; ++trial) {
      Matrix y = random_matrix(7, 3, rng);
      const AffinityBatch w = batch_of(random_symmetric_affinity(7, rng));
      Matrix grad;
      spectral_loss(y, w, variant, LossScaling::inverse_m, &grad);
      for (std::size_t i = 0; i < y.data().size(); ++i) {
        const double fd = central_difference(
            y.data()[i], [&] { return spectral_loss(y, w, variant, LossScaling::inverse_m); });
        CHECK(rel_err(fd, grad.data()[i]) < 1e-4);
      }
    }
  }
}

TEST_CASE("orthonorm step examples") {
  // Linear 1-unit net with weight 1: Ỹ = x.
  Mlp net(1, {DenseLayer{Matrix{{1.0}}, {0.0}, Activation::linear}});
  orthonorm_step(net, Matrix{{1.0}, {1.0}});
  CHECK((*net.frozen_output())(0, 0) == doctest::Approx(1.0));
  const Matrix y = net.forward(Matrix{{1.0}, {1.0}});
  CHECK(y(0, 0) == doctest::Approx(1.0));

  // Ỹ with ỸᵀỸ = m·I leaves the identity.
  Mlp id(2, {DenseLayer{Matrix{{1.0, 0.0}, {0.0, 1.0}}, {0.0, 0.0}, Activation::linear}});
  orthonorm_step(id, Matrix{{1.0, 1.0}, {1.0, -1.0}});
  CHECK(frobenius(*id.frozen_output() - Matrix::identity(2)) < 1e-12);

  try {
    orthonorm_step(net, Matrix{{0.0}, {0.0}, {0.0}});
    FAIL("expected RankDeficientBatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RankDeficientBatch);
  }
}

TEST_CASE("orthonorm step orthonormalizes its batch") {
  std::mt19937_64 rng(6);
  SpectralConfig cfg = small_config();
  cfg.k = 4;
  for (int trial = 0; trial < 10; ++trial) {
    cfg.seed = static_cast<std::uint64_t>(trial);
    Mlp net = make_spectral_net(3, cfg);
    const Matrix batch = random_matrix(50 + 10 * trial, 3, rng);
    orthonorm_step(net, batch);
    CHECK(ortho_defect(net.forward(batch)) < 1e-6);
  }
}

TEST_CASE("training gradient matches central differences") {
  std::mt19937_64 rng(31);
  SpectralConfig cfg = small_config();
  cfg.k = 3;
  cfg.hidden = parse_layers("tanh:6,relu:5");
  const Matrix x = random_matrix(25, 2, rng);
  const Matrix xo = random_matrix(20, 2, rng);
  const AffinityBatch w = batch_of(random_symmetric_affinity(25, rng));
  for (bool through : {false, true}) {
    for (auto variant : {LossVariant::unnormalized, LossVariant::normalized}) {
      CAPTURE(through);
      Mlp net = make_spectral_net(2, cfg);
      orthonorm_step(net, xo);
      const SpectralStep step =
          spectral_gradient(net, xo, x, w, variant, LossScaling::inverse_m, through);
      auto loss = [&] {
        if (!through) return spectral_loss(net.forward(x), w, variant, LossScaling::inverse_m);
        Mlp fresh = net;
        orthonorm_step(fresh, xo);
        return spectral_loss(fresh.forward(x), w, variant, LossScaling::inverse_m);
      };
      double worst = 0.0;
      for (std::size_t l = 0; l < net.layers().size(); ++l) {
        auto p = net.layers()[l].weight.data();
        for (std::size_t i = 0; i < p.size(); ++i)
          worst = std::max(worst, rel_err(central_difference(p[i], loss),
                                          step.grads.weight[l].data()[i]));
        auto& b = net.layers()[l].bias;
        for (std::size_t i = 0; i < b.size(); ++i)
          worst = std::max(worst, rel_err(central_difference(b[i], loss), step.grads.bias[l][i]));
      }
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("orthogonalization-aware gradient ignores output scale") {
  // Scaling the pre-output leaves the loss unchanged, so the gradient along
  // that direction vanishes.
  std::mt19937_64 rng(2);
  SpectralConfig cfg = small_config();
  cfg.hidden = parse_layers("relu:8");
  Mlp net(2, parse_layers("relu:8,linear:2"), rng);
  const Matrix x = random_matrix(30, 2, rng);
  const Matrix xo = random_matrix(30, 2, rng);
  const AffinityBatch w = batch_of(random_symmetric_affinity(30, rng));
  orthonorm_step(net, xo);
  const SpectralStep s =
      spectral_gradient(net, xo, x, w, LossVariant::unnormalized, LossScaling::inverse_m, true);
  // d/dc L(c·W_last, c·b_last) at c = 1 is Σ W·∂W + b·∂b.
  const DenseLayer& last = net.layers().back();
  double dir = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < last.weight.data().size(); ++i) {
    dir += last.weight.data()[i] * s.grads.weight.back().data()[i];
    scale += std::abs(last.weight.data()[i] * s.grads.weight.back().data()[i]);
  }
  for (std::size_t i = 0; i < last.bias.size(); ++i) dir += last.bias[i] * s.grads.bias.back()[i];
  CHECK(std::abs(dir) < 1e-9 * std::max(1.0, scale));
}

TEST_CASE("training on two blobs") {
  std::mt19937_64 rng(12);
  const Matrix x = two_blobs(200, 6.0, rng);
  SpectralConfig cfg = small_config();
  // Blob shares in a batch fluctuate, and with them the batch Gram matrix;
  // batches of 256 out of 400 keep that well inside the bound.
  cfg.batch_size = cfg.ortho_batch_size = 256;
  const SpectralTrainResult r = train_spectralnet(x, cfg);
  CHECK_FALSE(r.log.empty());
  CHECK(r.model.all_finite());
  const Matrix y = embed(r.model, x);
  // Both blobs collapse to distinct points in embedding space.
  double within = 0.0, across = 0.0;
  for (std::size_t i = 2; i < x.rows(); ++i) {
    within += std::sqrt(squared_distance(y.row(i), y.row(i % 2)));
    across += std::sqrt(squared_distance(y.row(i), y.row(1 - i % 2)));
  }
  CHECK(within < 0.1 * across);

  SUBCASE("deterministic in the seed") {
    CHECK(train_spectralnet(x, cfg).model == r.model);
  }
  SUBCASE("fresh batches stay roughly orthonormal") {
    // The defect on a fresh batch tracks how far its blob shares sit from
    // those of the last orthonormalizing batch, so draw half from each blob.
    std::mt19937_64 pick(1);
    std::vector<std::size_t> even, odd;
    for (std::size_t i = 0; i < x.rows(); ++i) (i % 2 ? odd : even).push_back(i);
    for (int b = 0; b < 10; ++b) {
      std::shuffle(even.begin(), even.end(), pick);
      std::shuffle(odd.begin(), odd.end(), pick);
      std::vector<std::size_t> rows(even.begin(), even.begin() + cfg.batch_size / 2);
      rows.insert(rows.end(), odd.begin(), odd.begin() + cfg.batch_size / 2);
      CHECK(ortho_defect(embed(r.model, x.gather_rows(rows))) < 0.1);
    }
  }
}

TEST_CASE("permuted rows with matching row order give the same model") {
  std::mt19937_64 rng(8);
  const Matrix x = two_blobs(40, 5.0, rng);
  SpectralConfig cfg = small_config();
  cfg.max_epochs = 3;
  cfg.batch_size = cfg.ortho_batch_size = 32;
  std::vector<std::size_t> perm(x.rows());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  // Logical point i sits in row inverse[i] of the permuted matrix.
  const Matrix permuted = x.gather_rows(perm);
  std::vector<std::size_t> inverse(perm.size());
  for (std::size_t r = 0; r < perm.size(); ++r) inverse[perm[r]] = r;
  SpectralTrainOptions opts;
  opts.row_order = inverse;
  const SpectralTrainResult a = train_spectralnet(x, cfg);
  const SpectralTrainResult b = train_spectralnet(permuted, cfg, opts);
  CHECK(a.model == b.model);
  const Matrix ya = embed(a.model, x);
  const Matrix yb = embed(b.model, permuted);
  CHECK(yb == ya.gather_rows(perm));
}

TEST_CASE("full-batch training approaches the bottom eigenspace") {
  std::mt19937_64 rng(5);
  const Matrix x = two_blobs(60, 3.0, rng);
  SpectralConfig cfg = small_config();
  cfg.batch_size = cfg.ortho_batch_size = x.rows();
  cfg.val_fraction = 0.0;
  cfg.max_epochs = 40;
  cfg.batches_per_epoch = 25;
  cfg.affinity.scale_mode = ScaleMode::fixed;
  cfg.affinity.fixed_sigma = 1.0;
  const SpectralOracle o = exact_spectral_clustering(x, 2, cfg.affinity);
  std::vector<double> trace;
  SpectralTrainOptions opts;
  opts.hook = [&](const Mlp& m, SpectralCheckpoint& cp) {
    cp.grassmann_sq = grassmann_to_subspace(m, x, o.eigenvectors);
    trace.push_back(*cp.grassmann_sq);
  };
  const SpectralTrainResult r = train_spectralnet(x, cfg, opts);
  REQUIRE(trace.size() >= 4);
  CHECK(trace.back() < 0.1);
  for (std::size_t i = trace.size() / 4 + 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1] + 1e-3);
  CHECK(r.log.back().grassmann_sq.has_value());
}

TEST_CASE("config validation") {
  SpectralConfig cfg;
  cfg.k = 0;
  CHECK_THROWS_AS(cfg.validate(100), Error);
  cfg = SpectralConfig{};
  cfg.lr_decay = 1.5;
  CHECK_THROWS_AS(cfg.validate(1000), Error);
  cfg = SpectralConfig{};
  cfg.batch_size = 4;
  CHECK_THROWS_AS(cfg.validate(1000), Error);  // not above n_neighbors
  CHECK(SpectralConfig{}.layers().back().activation == Activation::tanh);
}
