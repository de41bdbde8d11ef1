#pragma once

#include "pvcdr/linalg.hpp"
#include "pvcdr/rng.hpp"

namespace pvcdr {

// Minimal toolkit for ascent over p x d matrices with orthonormal columns.

/// Projection of an ambient direction v onto the tangent space at q:
/// v - q sym(q'v).
inline Matrix stiefel_tangent(const Matrix& q, const Matrix& v) {
  const Matrix qv = q.transpose() * v;
  return v - q * (0.5 * (qv + qv.transpose()));
}

/// QR retraction: orthonormalize q + step, fixing signs so the diagonal of R
/// is positive (continuous at step = 0).
inline Matrix stiefel_retract(const Matrix& q, const Matrix& step) {
  const Matrix moved = q + step;
  Eigen::HouseholderQR<Matrix> qr(moved);
  Matrix out = Matrix(qr.householderQ()).leftCols(q.cols());
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0.0) out.col(j) = -out.col(j);
  return out;
}

/// Uniformly random frame: thin QR of a standard-normal p x d matrix.
inline Matrix random_stiefel(Eigen::Index p, Eigen::Index d, RandomStream& rs) {
  Matrix g(p, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < p; ++i) g(i, j) = rs.normal();
  return stiefel_retract(g, Matrix::Zero(p, d));
}

}  // namespace pvcdr
