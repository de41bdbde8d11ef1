#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "pvcdr/rng.hpp"

namespace pvcdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric p x p matrix built from the lower triangle, so that
// entries(i,j) == entries(j,i) holds exactly (single storage).
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& m) : mat_(m) {
    if (mat_.rows() != mat_.cols() || mat_.rows() < 1)
      throw std::invalid_argument("SymMatrix: square matrix required");
    for (Eigen::Index j = 0; j < mat_.cols(); ++j)
      for (Eigen::Index i = j + 1; i < mat_.rows(); ++i)
        mat_(j, i) = mat_(i, j);
  }

  Eigen::Index dim() const { return mat_.rows(); }
  const Matrix& mat() const { return mat_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }

 private:
  Matrix mat_;
};

// Spectral decomposition with a fixed presentation: eigenvalues sorted
// descending, each eigenvector's first nonzero entry non-negative.
struct EigenDecomp {
  Vector values;   // descending
  Matrix vectors;  // column i pairs with values[i]
};

namespace detail {

// Sign convention: flip the column if its first entry of non-negligible
// magnitude is negative. Vectors are unit norm, so 1e-12 separates true
// zeros from rounding noise.
inline void fix_eigvec_signs(Matrix& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      if (std::abs(v(i, j)) > 1e-12) {
        if (v(i, j) < 0.0) v.col(j) = -v.col(j);
        break;
      }
    }
  }
}

}  // namespace detail

inline EigenDecomp eigen_sym(const SymMatrix& m) {
  if (!m.mat().allFinite()) throw std::invalid_argument("non-finite matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigen_sym: decomposition failed");
  EigenDecomp out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  detail::fix_eigvec_signs(out.vectors);
  return out;
}

/// Haar-distributed p x p orthogonal matrix: QR of a standard-normal matrix
/// with the R-diagonal sign correction that makes Q uniform over O(p).
inline Matrix haar_orthogonal(int p, RandomStream& rs) {
  if (p < 1) throw std::invalid_argument("haar_orthogonal: p >= 1 required");
  Matrix g(p, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < p; ++i) g(i, j) = rs.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < p; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

inline Matrix sample_haar_orthogonal(int p, const SeedSpec& seed) {
  RandomStream rs(seed);
  return haar_orthogonal(p, rs);
}

/// mean + L z with z i.i.d. standard normal; L is any factor with LL' equal
/// to the desired covariance.
inline Vector sample_mvn(const Vector& mean, const Matrix& cov_factor,
                         RandomStream& rs) {
  if (cov_factor.rows() != mean.size() || cov_factor.cols() != mean.size())
    throw std::invalid_argument("sample_mvn: dimension mismatch");
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rs.normal();
  return mean + cov_factor * z;
}

inline Vector sample_mvn(const Vector& mean, const Matrix& cov_factor,
                         const SeedSpec& seed) {
  RandomStream rs(seed);
  return sample_mvn(mean, cov_factor, rs);
}

/// Sample Pearson correlation from 1/m central moments. Zero variance in
/// either argument yields 0 by convention, keeping the function total.
inline double pearson_correlation(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("pearson_correlation: length mismatch");
  const double n = static_cast<double>(a.size());
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  const double va = da.squaredNorm() / n;
  const double vb = db.squaredNorm() / n;
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return (da.dot(db) / n) / std::sqrt(va * vb);
}

}  // namespace pvcdr
