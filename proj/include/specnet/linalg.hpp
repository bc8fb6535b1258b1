#pragma once

#include <vector>

#include "specnet/matrix.hpp"

namespace specnet {

/// Ascending eigenvalues with matching orthonormal eigenvectors stored as
/// the columns of `vectors`.
struct EigenPair {
  std::vector<double> values;
  Matrix vectors;
};

enum class EigenMethod {
  automatic,       ///< Jacobi for small inputs, tridiagonal QL otherwise
  jacobi,          ///< cyclic Jacobi rotations
  tridiagonal_ql,  ///< Householder reduction followed by implicit QL
};

/// Lower-triangular L with L·Lᵀ = gram.
///
/// Throws Error(NotPositiveDefinite) when a pivot is non-finite or falls
/// below 1e-12·trace(gram)/k. No jitter is added.
Matrix cholesky(const Matrix& gram);

/// Inverse of a lower-triangular matrix with nonzero diagonal.
Matrix lower_triangular_inverse(const Matrix& lower);

/// Q = a·(L⁻¹)ᵀ where L·Lᵀ = aᵀa. Q has orthonormal columns and every
/// leading block of columns spans the same space as the matching block of a.
Matrix cholesky_qr(const Matrix& a);

/// Full symmetric eigendecomposition, eigenvalues ascending.
/// Throws Error(NoConvergence) if the sweep/iteration budget is exhausted.
EigenPair sym_eigen(const Matrix& a, EigenMethod method = EigenMethod::automatic);

/// Squared Grassmann distance: k − Σcos²θᵢ over the principal angles between
/// span(a) and span(b). Both inputs are orthonormalized first, so any full
/// column rank bases work.
double grassmann_sq(const Matrix& a, const Matrix& b);

/// Unnormalized graph Laplacian D − W.
Matrix laplacian(const Matrix& w);

}  // namespace specnet
