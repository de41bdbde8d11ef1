#pragma once

#include <stdexcept>

#include "pvcdr/linalg.hpp"
#include "pvcdr/models.hpp"

namespace pvcdr {

// Empirical checks of the sufficient-reduction property: if the model holds
// with frame Gamma, the complement projection Gamma0'X is independent of Y,
// so its sample correlations with functions of Y must vanish.

/// Correlation matrix between projections of X and the test functions
/// {y, |y - ybar|, (y - ybar)^2}. `stats` covers the complement frame; the
/// signal fields are filled by dispersion_check only and hold the same
/// statistics for the frame's own (squared) projections.
struct IndependenceReport {
  Matrix stats;        // (p - d) x 3, complement side
  double max_abs = 0.0;
  Eigen::Index n = 0;
  double threshold = 0.0;  // 4 / sqrt(n)
  bool pass = false;
  Matrix signal_stats;     // d x 3, dispersion_check only
  double signal_max = 0.0;
};

/// Orthonormal basis of the orthogonal complement of the column space,
/// p x (p - rank). Works for any spanning set, orthonormal or not.
inline Matrix orthonormal_complement(const Matrix& cols) {
  const Eigen::Index p = cols.rows();
  Eigen::ColPivHouseholderQR<Matrix> qr(cols);
  const auto rank = qr.rank();
  if (rank >= p)
    throw std::invalid_argument("orthonormal_complement: column space already full");
  const Matrix q = qr.householderQ();
  return q.rightCols(p - rank);
}

/// Gamma0 with Gamma0'Gamma = 0 and orthonormal columns, via full QR.
inline StiefelFrame complement_basis(const StiefelFrame& gamma) {
  return StiefelFrame(orthonormal_complement(gamma.cols()));
}

namespace detail {

inline Matrix y_test_functions(const Vector& y) {
  Matrix f(y.size(), 3);
  const double ybar = y.mean();
  f.col(0) = y;
  f.col(1) = (y.array() - ybar).abs();
  f.col(2) = (y.array() - ybar).square();
  return f;
}

inline Matrix correlation_table(const Matrix& proj, const Matrix& fy) {
  Matrix stats(proj.cols(), fy.cols());
  for (Eigen::Index k = 0; k < proj.cols(); ++k)
    for (Eigen::Index j = 0; j < fy.cols(); ++j)
      stats(k, j) = pearson_correlation(proj.col(k), fy.col(j));
  return stats;
}

}  // namespace detail

/// Correlations of each complement coordinate Gamma0'X with the y test
/// functions; passes when all magnitudes stay below 4/sqrt(n).
inline IndependenceReport independence_check(const Dataset& data,
                                             const StiefelFrame& gamma) {
  data.validate();
  if (data.n() < 30) throw std::invalid_argument("independence_check: n >= 30 required");
  if (data.p() != gamma.p())
    throw std::invalid_argument("independence_check: dimension mismatch");
  const StiefelFrame g0 = complement_basis(gamma);
  const Matrix fy = detail::y_test_functions(data.y);
  IndependenceReport rep;
  rep.stats = detail::correlation_table(data.x * g0.cols(), fy);
  rep.max_abs = rep.stats.size() ? rep.stats.cwiseAbs().maxCoeff() : 0.0;
  rep.n = data.n();
  rep.threshold = 4.0 / std::sqrt(static_cast<double>(data.n()));
  rep.pass = rep.max_abs <= rep.threshold;
  return rep;
}

/// Variance-sensitive variant: the same correlations for SQUARED projections.
/// A purely dispersive y-dependence is invisible to linear correlations, but
/// shows up in (gamma'x)^2; the complement side must still vanish when the
/// frame is right. pass refers to the complement side only.
inline IndependenceReport dispersion_check(const Dataset& data,
                                           const StiefelFrame& gamma) {
  data.validate();
  if (data.n() < 30) throw std::invalid_argument("dispersion_check: n >= 30 required");
  if (data.p() != gamma.p())
    throw std::invalid_argument("dispersion_check: dimension mismatch");
  const StiefelFrame g0 = complement_basis(gamma);
  const Matrix fy = detail::y_test_functions(data.y);
  const Matrix proj0 = (data.x * g0.cols()).array().square();
  const Matrix proj1 = (data.x * gamma.cols()).array().square();
  IndependenceReport rep;
  rep.stats = detail::correlation_table(proj0, fy);
  rep.signal_stats = detail::correlation_table(proj1, fy);
  rep.max_abs = rep.stats.size() ? rep.stats.cwiseAbs().maxCoeff() : 0.0;
  rep.signal_max = rep.signal_stats.cwiseAbs().maxCoeff();
  rep.n = data.n();
  rep.threshold = 4.0 / std::sqrt(static_cast<double>(data.n()));
  rep.pass = rep.max_abs <= rep.threshold;
  return rep;
}

/// Largest principal angle between the column spaces, from the singular
/// values of a'b. Zero when the spans coincide, pi/2 when orthogonal.
inline double subspace_angle(const StiefelFrame& a, const StiefelFrame& b) {
  if (a.p() != b.p() || a.d() != b.d())
    throw std::invalid_argument("subspace_angle: dimension mismatch");
  Eigen::JacobiSVD<Matrix> svd(a.cols().transpose() * b.cols());
  const double smin = svd.singularValues().minCoeff();
  return std::acos(std::clamp(smin, 0.0, 1.0));
}

}  // namespace pvcdr
