#include "specnet/siamese.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "specnet/affinity.hpp"
#include "specnet/error.hpp"

namespace specnet {

std::size_t PairSet::count(Polarity p) const {
  return static_cast<std::size_t>(std::count_if(
      pairs.begin(), pairs.end(), [p](const PointPair& q) { return q.polarity == p; }));
}

void SiameseConfig::validate() const {
  if (!(margin > 0.0)) throw Error(Errc::InvalidArgument, "siamese margin must be positive");
  if (n_pos_neighbors < 1) throw Error(Errc::InvalidArgument, "n_pos_neighbors must be >= 1");
  if (batch_size < 1) throw Error(Errc::InvalidArgument, "siamese batch size must be >= 1");
  if (!(lr > 0.0)) throw Error(Errc::InvalidArgument, "siamese lr must be positive");
  if (!(lr_decay > 0.0 && lr_decay < 1.0))
    throw Error(Errc::InvalidArgument, "siamese lr decay must lie in (0,1)");
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw Error(Errc::InvalidArgument, "siamese validation fraction must lie in [0,1)");
}

std::vector<LayerSpec> default_siamese_layers(std::size_t input_dim) {
  const std::size_t out = input_dim <= 3 ? input_dim : std::min<std::size_t>(input_dim, 10);
  return {{64, Activation::relu}, {64, Activation::relu}, {out, Activation::linear}};
}

PairSet build_pairs(const Matrix& points, const SiameseConfig& cfg, std::uint64_t seed) {
  const std::size_t n = points.rows();
  const std::size_t k = cfg.n_pos_neighbors;
  if (k < 1) throw Error(Errc::InvalidArgument, "n_pos_neighbors must be >= 1");
  if (k + 1 >= n)
    throw Error(Errc::TooFewPoints, "n_pos_neighbors=" + std::to_string(k) +
                                        " leaves no non-neighbors among " + std::to_string(n) +
                                        " points");
  const NeighborLists nn = knn(points, k);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> any(0, n - 1);

  PairSet set;
  std::vector<char> excluded(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> partners = nn[i];
    if (cfg.sample_one_neighbor) {
      std::uniform_int_distribution<std::size_t> pick(0, k - 1);
      partners = {nn[i][pick(rng)]};
    }
    excluded[i] = 1;
    for (std::size_t j : nn[i]) excluded[j] = 1;
    for (std::size_t j : partners) {
      set.pairs.push_back({i, j, Polarity::positive});
      std::size_t neg = any(rng);
      while (excluded[neg]) neg = any(rng);
      set.pairs.push_back({i, neg, Polarity::negative});
    }
    excluded[i] = 0;
    for (std::size_t j : nn[i]) excluded[j] = 0;
  }
  return set;
}

double contrastive_loss(std::span<const double> zi, std::span<const double> zj, Polarity polarity,
                        double margin, std::span<double> grad_i, std::span<double> grad_j) {
  if (zi.size() != zj.size())
    throw Error(Errc::DimensionMismatch, "embeddings have different dimensions");
  const bool want_grad = !grad_i.empty();
  const double d2 = squared_distance(zi, zj);
  double loss = 0.0;
  double coeff = 0.0;  // ∂L/∂zi = coeff·(zi − zj)
  if (polarity == Polarity::positive) {
    loss = d2;
    coeff = 2.0;
  } else {
    const double d = std::sqrt(d2);
    if (d < margin) {
      const double gap = margin - d;
      loss = gap * gap;
      coeff = d > 0.0 ? -2.0 * gap / d : 0.0;
    }
  }
  if (want_grad) {
    for (std::size_t t = 0; t < zi.size(); ++t) {
      const double g = coeff * (zi[t] - zj[t]);
      grad_i[t] = g;
      if (!grad_j.empty()) grad_j[t] = -g;
    }
  }
  return loss;
}

double mean_contrastive_loss(const Mlp& model, const Matrix& points,
                             std::span<const PointPair> pairs, double margin) {
  if (pairs.empty()) return 0.0;
  const Matrix z = model.forward(points);
  double total = 0.0;
  for (const PointPair& p : pairs)
    total += contrastive_loss(z.row(p.i), z.row(p.j), p.polarity, margin);
  return total / static_cast<double>(pairs.size());
}

namespace {

void add_into(Gradients& acc, const Gradients& g) {
  for (std::size_t l = 0; l < acc.weight.size(); ++l) {
    auto a = acc.weight[l].data();
    auto b = g.weight[l].data();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    for (std::size_t i = 0; i < acc.bias[l].size(); ++i) acc.bias[l][i] += g.bias[l][i];
  }
}

}  // namespace

void train_siamese_on_pairs(Mlp& model, const Matrix& points, const PairSet& pairs,
                            const SiameseConfig& cfg, std::uint64_t seed,
                            SiameseTrainStats* stats) {
  cfg.validate();
  if (pairs.pairs.empty()) throw Error(Errc::InvalidArgument, "empty pair set");
  std::mt19937_64 rng(seed);

  std::vector<PointPair> all = pairs.pairs;
  std::shuffle(all.begin(), all.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(all.size()));
  if (n_val >= all.size()) n_val = 0;
  const std::vector<PointPair> val(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<PointPair> train(all.begin() + static_cast<std::ptrdiff_t>(n_val), all.end());

  RmspropState opt = RmspropState::for_model(model);
  LrSchedule sched{cfg.lr, cfg.lr_decay, cfg.patience, cfg.lr_floor};
  std::vector<double> history;
  const std::size_t d = points.cols();
  const std::size_t emb = model.output_dim();

  std::size_t epoch = 0;
  for (; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train.size(); start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, train.size() - start);
      Matrix xa(b, d), xb(b, d);
      for (std::size_t r = 0; r < b; ++r) {
        const PointPair& p = train[start + r];
        std::copy_n(points.row(p.i).begin(), d, xa.row(r).begin());
        std::copy_n(points.row(p.j).begin(), d, xb.row(r).begin());
      }
      ForwardCache ca, cb;
      const Matrix za = model.forward(xa, ca);
      const Matrix zb = model.forward(xb, cb);
      Matrix ga(b, emb), gb(b, emb);
      const double inv_b = 1.0 / static_cast<double>(b);
      for (std::size_t r = 0; r < b; ++r) {
        epoch_loss += contrastive_loss(za.row(r), zb.row(r), train[start + r].polarity,
                                       cfg.margin, ga.row(r), gb.row(r));
      }
      for (double& v : ga.data()) v *= inv_b;
      for (double& v : gb.data()) v *= inv_b;
      Gradients g = model.backward(ca, ga);
      add_into(g, model.backward(cb, gb));
      rmsprop_step(model, g, opt, sched.lr);
    }
    epoch_loss /= static_cast<double>(train.size());
    const double monitored =
        val.empty() ? epoch_loss : mean_contrastive_loss(model, points, val, cfg.margin);
    if (!std::isfinite(monitored))
      throw Error(Errc::NonFiniteLoss, "siamese loss diverged at epoch " + std::to_string(epoch));
    history.push_back(monitored);
    const ScheduleUpdate u = schedule_update(sched, history);
    sched = u.schedule;
    if (stats) stats->final_val_loss = monitored;
    if (u.stop) {
      ++epoch;
      break;
    }
  }
  if (stats) {
    stats->epochs = epoch;
    stats->final_lr = sched.lr;
  }
}

Mlp train_siamese(const Matrix& points, const SiameseConfig& cfg, std::uint64_t seed,
                  SiameseTrainStats* stats) {
  cfg.validate();
  const PairSet pairs = build_pairs(points, cfg, seed);
  std::mt19937_64 init_rng(seed ^ 0x5eedf00dULL);
  Mlp model(points.cols(), cfg.layers.empty() ? default_siamese_layers(points.cols()) : cfg.layers,
            init_rng);
  train_siamese_on_pairs(model, points, pairs, cfg, seed + 1, stats);
  return model;
}

}  // namespace specnet
