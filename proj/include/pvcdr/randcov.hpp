#pragma once

#include <stdexcept>

#include "pvcdr/linalg.hpp"
#include "pvcdr/rng.hpp"

namespace pvcdr {

// Two "uniform over the positive-definite cone" covariance generators.
// Both draw eigenvalue-scale parameters i.i.d. U(0, c); c is an explicit
// truncation parameter (a proper uniform law on the cone does not exist).
enum class CovKind { Rotation, Entry };

struct CovScheme {
  CovKind kind = CovKind::Rotation;
  double c = 1000.0;  // eigenvalue / variance upper bound
  int p = 2;

  void validate() const {
    if (c <= 0.0) throw std::invalid_argument("CovScheme: c > 0 required");
    if (p < 1) throw std::invalid_argument("CovScheme: p >= 1 required");
    if (kind == CovKind::Entry && p != 2)
      throw std::invalid_argument("CovScheme: entry scheme is defined for p == 2 only");
  }
};

/// 2x2 rotation  A = [[cos t, sin t], [-sin t, cos t]].
inline Matrix rotation2(double theta) {
  Matrix a(2, 2);
  const double c = std::cos(theta), s = std::sin(theta);
  a << c, s, -s, c;
  return a;
}

/// A diag(lambda) A' for a given orthogonal A.
inline SymMatrix rotation_sigma(const Vector& lambda, const Matrix& a) {
  if (a.rows() != lambda.size() || a.cols() != lambda.size())
    throw std::invalid_argument("rotation_sigma: dimension mismatch");
  return SymMatrix(a * lambda.asDiagonal() * a.transpose());
}

/// [[l1, alpha], [alpha, l2]].
inline SymMatrix entry_sigma(double l1, double l2, double alpha) {
  Matrix s(2, 2);
  s << l1, alpha, alpha, l2;
  return SymMatrix(s);
}

struct RotationDraw {
  Vector lambda;  // i.i.d. U(0, c)
  Matrix axes;    // rotation2(theta) for p = 2, Haar orthogonal for p > 2
  SymMatrix sigma;
};

struct EntryDraw {
  double l1 = 0, l2 = 0, alpha = 0;  // alpha | l ~ U(-sqrt(l1 l2), sqrt(l1 l2))
  SymMatrix sigma;
};

// Axis lengths first, then the rotation: an axis-aligned ellipse with
// arbitrary half-axes in (0, c), rotated to an arbitrary angle. Exact zeros
// (probability 2^-53 per draw) are redrawn so Sigma stays invertible.
inline RotationDraw sample_rotation_draw(const CovScheme& scheme, RandomStream& rs) {
  scheme.validate();
  if (scheme.kind != CovKind::Rotation)
    throw std::invalid_argument("sample_rotation_draw: rotation scheme required");
  Vector lambda(scheme.p);
  for (int i = 0; i < scheme.p; ++i) {
    do {
      lambda(i) = rs.uniform(0.0, scheme.c);
    } while (lambda(i) == 0.0);
  }
  Matrix axes = scheme.p == 2 ? rotation2(rs.uniform(0.0, 2.0 * 3.14159265358979323846))
                              : haar_orthogonal(scheme.p, rs);
  SymMatrix sigma = rotation_sigma(lambda, axes);
  return RotationDraw{std::move(lambda), std::move(axes), std::move(sigma)};
}

inline EntryDraw sample_entry_draw(const CovScheme& scheme, RandomStream& rs) {
  scheme.validate();
  if (scheme.kind != CovKind::Entry)
    throw std::invalid_argument("sample_entry_draw: entry scheme required");
  // det(Sigma) = l1 l2 - alpha^2 > 0 almost surely; a numerically singular
  // draw is discarded and redrawn.
  for (;;) {
    const double l1 = rs.uniform(0.0, scheme.c);
    const double l2 = rs.uniform(0.0, scheme.c);
    const double bound = std::sqrt(l1 * l2);
    const double alpha = rs.uniform(-bound, bound);
    if (l1 * l2 - alpha * alpha > 0.0)
      return EntryDraw{l1, l2, alpha, entry_sigma(l1, l2, alpha)};
  }
}

inline SymMatrix sample_rotation_sigma(const CovScheme& scheme, const SeedSpec& seed) {
  RandomStream rs(seed);
  return sample_rotation_draw(scheme, rs).sigma;
}

inline SymMatrix sample_entry_sigma(const CovScheme& scheme, const SeedSpec& seed) {
  RandomStream rs(seed);
  return sample_entry_draw(scheme, rs).sigma;
}

inline SymMatrix sample_sigma(const CovScheme& scheme, RandomStream& rs) {
  return scheme.kind == CovKind::Rotation ? sample_rotation_draw(scheme, rs).sigma
                                          : sample_entry_draw(scheme, rs).sigma;
}

}  // namespace pvcdr
