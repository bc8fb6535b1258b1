#include "specnet/shatter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "specnet/error.hpp"
#include "specnet/linalg.hpp"

namespace specnet {

namespace {

struct TreeEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double length = 0.0;
};

/// Prim's algorithm over the listed rows of `pts`; edges refer to rows.
std::vector<TreeEdge> minimum_spanning_tree(const Matrix& pts, std::span<const std::size_t> rows) {
  const std::size_t n = rows.size();
  std::vector<TreeEdge> edges;
  if (n < 2) return edges;
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, 0);
  in_tree[0] = 1;
  for (std::size_t j = 1; j < n; ++j) best[j] = squared_distance(pts.row(rows[0]), pts.row(rows[j]));
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j)
      if (!in_tree[j] && (next == n || best[j] < best[next])) next = j;
    in_tree[next] = 1;
    edges.push_back({rows[parent[next]], rows[next], std::sqrt(best[next])});
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = squared_distance(pts.row(rows[next]), pts.row(rows[j]));
      if (d < best[j]) {
        best[j] = d;
        parent[j] = next;
      }
    }
  }
  return edges;
}

/// Splits `total` fill points over the edges proportionally to length,
/// rounding by largest remainder (ties to the lower edge index).
std::vector<std::size_t> allocate_fill(const std::vector<TreeEdge>& edges, std::size_t total) {
  const double len = std::accumulate(edges.begin(), edges.end(), 0.0,
                                     [](double s, const TreeEdge& e) { return s + e.length; });
  std::vector<std::size_t> count(edges.size());
  std::vector<double> remainder(edges.size());
  std::size_t used = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double quota = static_cast<double>(total) * edges[e].length / len;
    count[e] = static_cast<std::size_t>(std::floor(quota));
    remainder[e] = quota - static_cast<double>(count[e]);
    used += count[e];
  }
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; used < total; ++i, ++used) ++count[order[i % order.size()]];
  return count;
}

double side_bottleneck(const Matrix& pts, const std::vector<int>& side, int which) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < side.size(); ++i)
    if (side[i] == which) rows.push_back(i);
  double worst = 0.0;
  for (const TreeEdge& e : minimum_spanning_tree(pts, rows)) worst = std::max(worst, e.length);
  return worst;
}

void set_point(Matrix& pts, std::size_t row, double x, double y, double z) {
  pts(row, 0) = x;
  pts(row, 1) = y;
  pts(row, 2) = z;
}

std::size_t grid_side(std::size_t m) {
  std::size_t s = 1;
  while (s * s < 2 * m) ++s;
  return s;
}

}  // namespace

Matrix ShatterInstance::base_points() const {
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  return points.gather_rows(idx);
}

Matrix shatter_base_grid(std::size_t m) {
  const std::size_t side = grid_side(m);
  Matrix g(2 * m, 3);
  for (std::size_t c = 0; c < 2 * m; ++c)
    set_point(g, c, static_cast<double>(c % side), static_cast<double>(c / side), 0.0);
  return g;
}

ShatterInstance build_shatter_instance(std::size_t m, std::span<const int> dichotomy,
                                       std::uint64_t seed) {
  if (m < 1) throw Error(Errc::InvalidArgument, "shatter instance needs m >= 1");
  if (dichotomy.size() != m)
    throw Error(Errc::LengthMismatch, "dichotomy must have one entry per base point");
  for (int d : dichotomy)
    if (d != 0 && d != 1) throw Error(Errc::InvalidArgument, "dichotomy entries must be 0 or 1");

  ShatterInstance inst;
  inst.m = m;
  inst.dichotomy.assign(dichotomy.begin(), dichotomy.end());
  inst.points = Matrix(10 * m, 3);
  inst.side.assign(10 * m, 0);
  Matrix& pts = inst.points;

  const Matrix grid = shatter_base_grid(m);
  for (std::size_t i = 0; i < 2 * m; ++i)
    std::copy_n(grid.row(i).begin(), 3, pts.row(i).begin());
  for (std::size_t i = 0; i < m; ++i) inst.side[i] = dichotomy[i];

  // Balancing cells: alternate S, T while both sides still need points.
  std::size_t need[2] = {m, m};
  for (int d : dichotomy) --need[d];
  std::vector<std::size_t> cells(m);
  std::iota(cells.begin(), cells.end(), m);
  std::mt19937_64 rng(seed);
  if (seed != 0) std::shuffle(cells.begin(), cells.end(), rng);
  int turn = 0;
  for (std::size_t cell : cells) {
    if (need[turn] == 0) turn = 1 - turn;
    inst.side[cell] = turn;
    --need[turn];
    turn = 1 - turn;
  }

  // Lifted copies and midpoints.
  for (std::size_t i = 0; i < 2 * m; ++i) {
    const int s = inst.side[i];
    const double z = s == 0 ? 1.0 : -1.0;
    set_point(pts, 2 * m + i, pts(i, 0), pts(i, 1), z);
    set_point(pts, 4 * m + i, pts(i, 0), pts(i, 1), 0.5 * z);
    inst.side[2 * m + i] = s;
    inst.side[4 * m + i] = s;
  }

  // Fill points along each side's spanning tree of lifted copies.
  std::size_t next = 6 * m;
  for (int s = 0; s < 2; ++s) {
    std::vector<std::size_t> copies;
    for (std::size_t i = 0; i < 2 * m; ++i)
      if (inst.side[i] == s) copies.push_back(2 * m + i);
    const double z = s == 0 ? 1.0 : -1.0;
    const std::vector<TreeEdge> tree = minimum_spanning_tree(pts, copies);
    if (tree.empty()) {
      // A lone copy has no edges to fill; stack the points above it instead.
      for (std::size_t t = 1; t <= 2 * m; ++t, ++next) {
        const std::size_t c = copies.front();
        set_point(pts, next, pts(c, 0), pts(c, 1), z * (1.0 + 0.5 * static_cast<double>(t)));
        inst.side[next] = s;
      }
      continue;
    }
    const std::vector<std::size_t> fill = allocate_fill(tree, 2 * m);
    for (std::size_t e = 0; e < tree.size(); ++e) {
      const auto a = pts.row(tree[e].a);
      const auto b = pts.row(tree[e].b);
      for (std::size_t t = 1; t <= fill[e]; ++t, ++next) {
        const double f = static_cast<double>(t) / static_cast<double>(fill[e] + 1);
        set_point(pts, next, a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]),
                  a[2] + f * (b[2] - a[2]));
        inst.side[next] = s;
      }
    }
  }
  if (next != 10 * m)
    throw Error(Errc::ConstructionInvariantViolated,
                "built " + std::to_string(next) + " points instead of " + std::to_string(10 * m));

  inst.max_path_gap = std::max(side_bottleneck(pts, inst.side, 0), side_bottleneck(pts, inst.side, 1));
  double cross = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 10 * m; ++i)
    for (std::size_t j = 0; j < 10 * m; ++j)
      if (inst.side[i] == 0 && inst.side[j] == 1)
        cross = std::min(cross, std::sqrt(squared_distance(pts.row(i), pts.row(j))));
  inst.min_cross_distance = cross;

  const auto s_count = static_cast<std::size_t>(std::count(inst.side.begin(), inst.side.end(), 0));
  if (s_count != 5 * m)
    throw Error(Errc::ConstructionInvariantViolated, "partition is not balanced");
  if (!inst.property_a())
    throw Error(Errc::ConstructionInvariantViolated,
                "within-set path gap " + std::to_string(inst.max_path_gap) + " is not below 1");
  if (!inst.property_b())
    throw Error(Errc::ConstructionInvariantViolated,
                "cross-set distance " + std::to_string(inst.min_cross_distance) + " is below 1");
  return inst;
}

SeparationCheck check_separation(const ShatterInstance& inst, double sigma) {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  SeparationCheck c;
  c.alpha = std::exp(-inst.max_path_gap * inst.max_path_gap * inv);
  c.beta = std::exp(-inv);
  c.min_path_affinity = 1.0;
  for (int s = 0; s < 2; ++s) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < inst.side.size(); ++i)
      if (inst.side[i] == s) rows.push_back(i);
    for (const TreeEdge& e : minimum_spanning_tree(inst.points, rows))
      c.min_path_affinity = std::min(c.min_path_affinity, std::exp(-e.length * e.length * inv));
  }
  c.max_cross_affinity = std::exp(-inst.min_cross_distance * inst.min_cross_distance * inv);
  return c;
}

std::vector<double> geometric_sweep(double start, double stop, double ratio) {
  if (!(start > 0.0 && stop > 0.0 && ratio > 0.0 && ratio < 1.0))
    throw Error(Errc::InvalidArgument, "sweep needs positive bounds and a ratio in (0,1)");
  std::vector<double> out;
  for (double s = start; s >= stop * (1.0 - 1e-12); s *= ratio) out.push_back(s);
  return out;
}

bool fiedler_sign_matches(const ShatterInstance& inst, double sigma) {
  const Matrix& pts = inst.points;
  const std::size_t n = pts.rows();
  const double inv = 1.0 / (2.0 * sigma * sigma);
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      w(i, j) = w(j, i) = std::exp(-squared_distance(pts.row(i), pts.row(j)) * inv);
  const EigenPair e = sym_eigen(laplacian(w));
  if (n < 2) return false;
  int orientation = 0;  // +1: S positive, −1: S negative
  for (std::size_t i = 0; i < n; ++i) {
    const double y = e.vectors(i, 1);
    if (y == 0.0) return false;
    const int sign = (y > 0) == (inst.side[i] == 0) ? 1 : -1;
    if (orientation == 0) orientation = sign;
    if (sign != orientation) return false;
  }
  return true;
}

ShatterOutcome verify_shattering(const ShatterInstance& inst, std::span<const double> sweep) {
  ShatterOutcome out;
  for (double sigma : sweep) {
    ++out.sigmas_tried;
    if (fiedler_sign_matches(inst, sigma)) {
      out.success = true;
      out.sigma = sigma;
      return out;
    }
  }
  return out;
}

}  // namespace specnet
