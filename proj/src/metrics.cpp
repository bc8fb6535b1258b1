#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "specnet/cluster.hpp"
#include "specnet/error.hpp"

namespace specnet {

// Shortest augmenting path formulation with row/column potentials, O(n³).
std::vector<std::size_t> hungarian(const Matrix& cost) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) throw Error(Errc::DimensionMismatch, "hungarian: cost must be square");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(r0 - 1, j - 1) - u[r0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> result(n);
  for (std::size_t j = 1; j <= n; ++j) result[match[j] - 1] = j - 1;
  return result;
}

namespace {

void require_same_length(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw Error(Errc::LengthMismatch, "labelings have lengths " + std::to_string(a.size()) +
                                          " and " + std::to_string(b.size()));
}

/// Maps arbitrary label values onto 0..count-1 in sorted order.
std::vector<std::size_t> compact(std::span<const int> labels, std::size_t& count) {
  std::map<int, std::size_t> ids;
  for (int l : labels) ids.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [label, id] : ids) id = next++;
  count = next;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
  return out;
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  return h;
}

}  // namespace

double acc(std::span<const int> truth, std::span<const int> pred) {
  require_same_length(truth, pred);
  if (truth.empty()) return 1.0;
  std::size_t nt = 0, np = 0;
  const auto t = compact(truth, nt);
  const auto p = compact(pred, np);
  const std::size_t k = std::max(nt, np);
  Matrix confusion(k, k);
  for (std::size_t i = 0; i < t.size(); ++i) confusion(p[i], t[i]) += 1.0;
  Matrix cost(k, k);
  const double top = static_cast<double>(truth.size());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) cost(i, j) = top - confusion(i, j);
  const auto match = hungarian(cost);
  double hits = 0.0;
  for (std::size_t i = 0; i < k; ++i) hits += confusion(i, match[i]);
  return hits / top;
}

double mutual_information(std::span<const int> truth, std::span<const int> pred) {
  require_same_length(truth, pred);
  if (truth.empty()) return 0.0;
  std::size_t nt = 0, np = 0;
  const auto t = compact(truth, nt);
  const auto p = compact(pred, np);
  const double n = static_cast<double>(truth.size());
  Matrix joint(nt, np);
  std::vector<double> mt(nt, 0.0), mp(np, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    joint(t[i], p[i]) += 1.0;
    mt[t[i]] += 1.0;
    mp[p[i]] += 1.0;
  }
  double mi = 0.0;
  for (std::size_t a = 0; a < nt; ++a)
    for (std::size_t b = 0; b < np; ++b) {
      const double c = joint(a, b);
      if (c > 0.0) mi += (c / n) * std::log(c * n / (mt[a] * mp[b]));
    }
  return std::max(mi, 0.0);
}

double nmi(std::span<const int> truth, std::span<const int> pred) {
  require_same_length(truth, pred);
  if (truth.empty()) return 1.0;
  std::size_t nt = 0, np = 0;
  const auto t = compact(truth, nt);
  const auto p = compact(pred, np);
  const double n = static_cast<double>(truth.size());
  std::vector<double> mt(nt, 0.0), mp(np, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt[t[i]] += 1.0;
    mp[p[i]] += 1.0;
  }
  const double h = std::max(entropy(mt, n), entropy(mp, n));
  if (h <= 0.0) return 1.0;
  return std::clamp(mutual_information(truth, pred) / h, 0.0, 1.0);
}

}  // namespace specnet
