#include "specnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "specnet/error.hpp"

namespace specnet {

namespace {

void require_square(const Matrix& a, const char* op) {
  if (a.rows() != a.cols())
    throw Error(Errc::DimensionMismatch, std::string(op) + ": matrix is not square");
}

EigenPair sorted_pair(std::vector<double> values, const Matrix& vecs) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  EigenPair out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = values[order[c]];
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = vecs(r, order[c]);
  }
  return out;
}

EigenPair jacobi_eigen(const Matrix& input) {
  const std::size_t n = input.rows();
  Matrix a = input;
  Matrix v = Matrix::identity(n);

  double total = 0.0;
  for (double x : a.data()) total += x * x;
  const double tol = total * 1e-30;

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= tol || off == 0.0) {
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
      return sorted_pair(std::move(values), v);
    }

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Rotation already below roundoff on both diagonals.
        if (sweep > 3 && std::abs(apq) * 1e18 < std::abs(app) &&
            std::abs(apq) * 1e18 < std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  throw Error(Errc::NoConvergence, "Jacobi sweeps exhausted for n=" + std::to_string(n));
}

// Householder tridiagonalization followed by the implicit QL iteration, in
// the formulation of the EISPACK tred2/tql2 pair. The accumulated
// transformation is kept transposed (row i holds column i of V) so the hot
// loops walk contiguous memory.
EigenPair tridiagonal_ql_eigen(const Matrix& input) {
  const std::size_t n = input.rows();
  Matrix vt = input;  // symmetric, so vt == V initially
  std::vector<double> d(n), e(n);
  auto V = [&](std::size_t r, std::size_t c) -> double& { return vt(c, r); };

  for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        const double* colj = vt.row(j).data();  // V(k, j) for k
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += colj[k] * d[k];
          e[k] += colj[k] * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        double* colj = vt.row(j).data();
        for (std::size_t k = j; k <= i - 1; ++k) colj[k] -= (f * e[k] + g * d[k]);
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      const double* coli1 = vt.row(i + 1).data();
      for (std::size_t k = 0; k <= i; ++k) d[k] = coli1[k] / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double* colj = vt.row(j).data();
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += coli1[k] * colj[k];
        for (std::size_t k = 0; k <= i; ++k) colj[k] -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;

  // Implicit QL on the tridiagonal (d, e).
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 60)
          throw Error(Errc::NoConvergence,
                      "tridiagonal QL did not converge for n=" + std::to_string(n));
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          double* ci = vt.row(ii).data();
          double* ci1 = vt.row(ii + 1).data();
          for (std::size_t k = 0; k < n; ++k) {
            const double hk = ci1[k];
            ci1[k] = s * ci[k] + c * hk;
            ci[k] = c * ci[k] - s * hk;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }

  return sorted_pair(std::move(d), vt.transpose());
}

}  // namespace

Matrix cholesky(const Matrix& gram) {
  require_square(gram, "cholesky");
  const std::size_t k = gram.rows();
  double trace = 0.0;
  for (std::size_t i = 0; i < k; ++i) trace += gram(i, i);
  const double floor = 1e-12 * trace / static_cast<double>(k ? k : 1);

  Matrix l(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    double pivot = gram(j, j);
    for (std::size_t p = 0; p < j; ++p) pivot -= l(j, p) * l(j, p);
    if (!std::isfinite(pivot) || pivot <= 0.0 || pivot < floor)
      throw Error(Errc::NotPositiveDefinite,
                  "pivot " + std::to_string(j) + " is " + std::to_string(pivot));
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < k; ++i) {
      double s = gram(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= l(i, p) * l(j, p);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix lower_triangular_inverse(const Matrix& lower) {
  require_square(lower, "lower_triangular_inverse");
  const std::size_t k = lower.rows();
  Matrix inv(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    inv(c, c) = 1.0 / lower(c, c);
    for (std::size_t r = c + 1; r < k; ++r) {
      double s = 0.0;
      for (std::size_t p = c; p < r; ++p) s += lower(r, p) * inv(p, c);
      inv(r, c) = -s / lower(r, r);
    }
  }
  return inv;
}

Matrix cholesky_qr(const Matrix& a) {
  const Matrix l = cholesky(matmul_tn(a, a));
  const std::size_t k = a.cols();
  // Each row q of Q solves L·qᵀ = aᵀ_row by forward substitution.
  Matrix q(a.rows(), k);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto src = a.row(r);
    auto dst = q.row(r);
    for (std::size_t i = 0; i < k; ++i) {
      double s = src[i];
      for (std::size_t p = 0; p < i; ++p) s -= l(i, p) * dst[p];
      dst[i] = s / l(i, i);
    }
  }
  return q;
}

EigenPair sym_eigen(const Matrix& a, EigenMethod method) {
  require_square(a, "sym_eigen");
  if (!a.all_finite()) throw Error(Errc::NoConvergence, "sym_eigen: non-finite input");
  if (a.rows() == 0) return {};
  if (method == EigenMethod::automatic)
    method = a.rows() <= 128 ? EigenMethod::jacobi : EigenMethod::tridiagonal_ql;
  if (method == EigenMethod::jacobi) return jacobi_eigen(a);
  return tridiagonal_ql_eigen(a);
}

double grassmann_sq(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(Errc::DimensionMismatch, "grassmann_sq: bases have different shapes");
  const Matrix qa = cholesky_qr(a);
  const Matrix qb = cholesky_qr(b);
  // Σcos²θ equals the squared Frobenius norm of Qaᵀ·Qb.
  const double f = frobenius(matmul_tn(qa, qb));
  const double k = static_cast<double>(a.cols());
  return std::clamp(k - f * f, 0.0, k);
}

Matrix laplacian(const Matrix& w) {
  require_square(w, "laplacian");
  const std::size_t n = w.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      deg += w(i, j);
      l(i, j) = -w(i, j);
    }
    l(i, i) += deg;
  }
  return l;
}

}  // namespace specnet
