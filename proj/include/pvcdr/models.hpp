#pragma once

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pvcdr/linalg.hpp"
#include "pvcdr/rng.hpp"

namespace pvcdr {

// Inverse-regression models in which y enters the conditional dispersion
// (and optionally the conditional mean) of X through a low-dimensional frame:
//
//   model 3:  X = sigma^2 (Gamma nu_y Gamma' + I_p) eps
//   model 5:  X = mu + Gamma1 nu_y + sigma^2 (Gamma2 tau_y Gamma2' + I_p) eps
//
// with eps ~ N(0, I_p) independent of Y. Frames have orthonormal columns.

/// p x d matrix with orthonormal columns, d < p.
class StiefelFrame {
 public:
  explicit StiefelFrame(Matrix cols, double tol = 1e-8) : cols_(std::move(cols)) {
    if (cols_.cols() < 1 || cols_.cols() >= cols_.rows())
      throw std::invalid_argument("StiefelFrame: 1 <= d < p required");
    const Matrix gram = cols_.transpose() * cols_;
    const double err =
        (gram - Matrix::Identity(cols_.cols(), cols_.cols())).cwiseAbs().maxCoeff();
    if (!(err <= tol))
      throw std::invalid_argument("StiefelFrame: columns not orthonormal");
  }

  Eigen::Index p() const { return cols_.rows(); }
  Eigen::Index d() const { return cols_.cols(); }
  const Matrix& cols() const { return cols_; }

  static StiefelFrame axis(Eigen::Index p, Eigen::Index i) {
    Matrix e = Matrix::Zero(p, 1);
    e(i, 0) = 1.0;
    return StiefelFrame(std::move(e));
  }

 private:
  Matrix cols_;
};

/// Parametric map y -> symmetric d x d dispersion profile. Admissible when
/// every eigenvalue of the returned matrix exceeds -1, so that the model
/// multiplier Gamma nu_y Gamma' + I_p stays positive definite.
class VarianceProfile {
 public:
  enum class Family { AbsDev, DiagAbsDev, Lookup };

  /// nu_y = scale * |y - center|, d = 1.
  static VarianceProfile abs_dev(double center, double scale) {
    VarianceProfile p;
    p.family_ = Family::AbsDev;
    p.d_ = 1;
    p.centers_ = Vector::Constant(1, center);
    p.scales_ = Vector::Constant(1, scale);
    return p;
  }

  /// diag(scale_k * |y - center_k|), d = centers.size().
  static VarianceProfile diag_abs_dev(Vector centers, Vector scales) {
    if (centers.size() != scales.size() || centers.size() < 1)
      throw std::invalid_argument("VarianceProfile: centers/scales mismatch");
    VarianceProfile p;
    p.family_ = Family::DiagAbsDev;
    p.d_ = static_cast<int>(centers.size());
    p.centers_ = std::move(centers);
    p.scales_ = std::move(scales);
    return p;
  }

  /// Finite table y -> symmetric matrix; y values must match exactly.
  static VarianceProfile lookup(std::map<double, Matrix> table) {
    if (table.empty()) throw std::invalid_argument("VarianceProfile: empty table");
    const auto d = table.begin()->second.rows();
    for (const auto& [y, m] : table)
      if (m.rows() != d || m.cols() != d)
        throw std::invalid_argument("VarianceProfile: inconsistent table dimensions");
    VarianceProfile p;
    p.family_ = Family::Lookup;
    p.d_ = static_cast<int>(d);
    p.table_ = std::move(table);
    return p;
  }

  int d() const { return d_; }
  Family family() const { return family_; }
  const Vector& centers() const { return centers_; }
  const Vector& scales() const { return scales_; }
  const std::map<double, Matrix>& table() const { return table_; }

  Matrix at(double y) const {
    switch (family_) {
      case Family::AbsDev:
      case Family::DiagAbsDev: {
        Matrix m = Matrix::Zero(d_, d_);
        for (int k = 0; k < d_; ++k)
          m(k, k) = scales_(k) * std::abs(y - centers_(k));
        return m;
      }
      case Family::Lookup: {
        const auto it = table_.find(y);
        if (it == table_.end())
          throw std::invalid_argument("VarianceProfile: y not in lookup table");
        return SymMatrix(it->second).mat();
      }
    }
    throw std::logic_error("VarianceProfile: unknown family");
  }

 private:
  Family family_ = Family::AbsDev;
  int d_ = 1;
  Vector centers_, scales_;
  std::map<double, Matrix> table_;
};

/// y -> length-d mean coordinates for the location term of model 5.
class MeanProfile {
 public:
  enum class Family { Linear, Lookup };

  /// Coordinate k is slopes[k] * y + intercepts[k].
  static MeanProfile linear(Vector slopes, Vector intercepts) {
    if (slopes.size() != intercepts.size() || slopes.size() < 1)
      throw std::invalid_argument("MeanProfile: slopes/intercepts mismatch");
    MeanProfile p;
    p.family_ = Family::Linear;
    p.d_ = static_cast<int>(slopes.size());
    p.slopes_ = std::move(slopes);
    p.intercepts_ = std::move(intercepts);
    return p;
  }

  static MeanProfile lookup(std::map<double, Vector> table) {
    if (table.empty()) throw std::invalid_argument("MeanProfile: empty table");
    const auto d = table.begin()->second.size();
    for (const auto& [y, v] : table)
      if (v.size() != d)
        throw std::invalid_argument("MeanProfile: inconsistent table dimensions");
    MeanProfile p;
    p.family_ = Family::Lookup;
    p.d_ = static_cast<int>(d);
    p.table_ = std::move(table);
    return p;
  }

  int d() const { return d_; }
  Family family() const { return family_; }
  const Vector& slopes() const { return slopes_; }
  const Vector& intercepts() const { return intercepts_; }
  const std::map<double, Vector>& table() const { return table_; }

  Vector at(double y) const {
    if (family_ == Family::Linear) return slopes_ * y + intercepts_;
    const auto it = table_.find(y);
    if (it == table_.end())
      throw std::invalid_argument("MeanProfile: y not in lookup table");
    return it->second;
  }

 private:
  Family family_ = Family::Linear;
  int d_ = 1;
  Vector slopes_, intercepts_;
  std::map<double, Vector> table_;
};

struct Model3Params {
  StiefelFrame gamma;
  VarianceProfile nu;
  double sigma2 = 1.0;

  void validate() const {
    if (nu.d() != gamma.d())
      throw std::invalid_argument("Model3Params: nu dimension must match gamma");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("Model3Params: sigma2 > 0 required");
  }
};

struct Model5Params {
  Vector mu;
  StiefelFrame gamma1;
  MeanProfile nu;        // mean coordinates, length d1
  StiefelFrame gamma2;
  VarianceProfile tau;   // dispersion profile, d2 x d2
  double sigma2 = 1.0;

  /// Frames may legitimately coincide (a single frame carrying both the
  /// location and the dispersion component); d1 + d2 < p is required only
  /// when they are distinct.
  bool shared_frame() const {
    return gamma1.cols().rows() == gamma2.cols().rows() &&
           gamma1.cols().cols() == gamma2.cols().cols() && gamma1.cols() == gamma2.cols();
  }

  void validate() const {
    if (gamma1.p() != gamma2.p())
      throw std::invalid_argument("Model5Params: frames must share the ambient dimension");
    if (mu.size() != gamma1.p())
      throw std::invalid_argument("Model5Params: mu dimension mismatch");
    if (nu.d() != gamma1.d())
      throw std::invalid_argument("Model5Params: nu dimension must match gamma1");
    if (tau.d() != gamma2.d())
      throw std::invalid_argument("Model5Params: tau dimension must match gamma2");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("Model5Params: sigma2 > 0 required");
    if (!shared_frame() && gamma1.d() + gamma2.d() >= gamma1.p())
      throw std::invalid_argument("Model5Params: d1 + d2 < p required for distinct frames");
  }
};

/// Paired observations (x_i in R^p, y_i), i = 1..n.
struct Dataset {
  Matrix x;  // n x p, one row per observation
  Vector y;  // length n

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }

  void validate() const {
    if (x.rows() < 1 || x.rows() != y.size())
      throw std::invalid_argument("Dataset: n >= 1 rows with matching y required");
    if (!x.allFinite() || !y.allFinite())
      throw std::invalid_argument("Dataset: non-finite entries");
  }
};

namespace detail {

inline void check_profile_admissible(const Matrix& profile_value) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(profile_value);
  if (es.eigenvalues().minCoeff() <= -1.0 + 1e-8)
    throw std::domain_error("profile not admissible at y");
}

}  // namespace detail

/// Multiplier M_y = sigma^2 (Gamma nu_y Gamma' + I_p) of model 3. The
/// conditional covariance of X given y is M_y^2.
inline Matrix multiplier_matrix(const Model3Params& params, double y) {
  params.validate();
  const Matrix nu_y = params.nu.at(y);
  detail::check_profile_admissible(nu_y);
  const Matrix& g = params.gamma.cols();
  const Eigen::Index p = params.gamma.p();
  return params.sigma2 * (g * nu_y * g.transpose() + Matrix::Identity(p, p)).eval();
}

/// x_i = sigma^2 (Gamma nu_{y_i} Gamma' + I) eps_i with eps_i i.i.d. N(0, I_p),
/// independent across observations and of the supplied ys.
inline Dataset sample_model3(const Model3Params& params, const Vector& ys,
                             const SeedSpec& seed) {
  params.validate();
  if (ys.size() < 1) throw std::invalid_argument("sample_model3: n >= 1 required");
  const Eigen::Index p = params.gamma.p();
  const Matrix& g = params.gamma.cols();
  RandomStream rs(seed);
  Dataset data;
  data.x.resize(ys.size(), p);
  data.y = ys;
  Vector eps(p);
  for (Eigen::Index i = 0; i < ys.size(); ++i) {
    const Matrix nu_y = params.nu.at(ys(i));
    detail::check_profile_admissible(nu_y);
    for (Eigen::Index k = 0; k < p; ++k) eps(k) = rs.normal();
    data.x.row(i) =
        (params.sigma2 * (g * (nu_y * (g.transpose() * eps)) + eps)).transpose();
  }
  return data;
}

/// x_i = mu + Gamma1 nu_{y_i} + sigma^2 (Gamma2 tau_{y_i} Gamma2' + I) eps_i.
inline Dataset sample_model5(const Model5Params& params, const Vector& ys,
                             const SeedSpec& seed) {
  params.validate();
  if (ys.size() < 1) throw std::invalid_argument("sample_model5: n >= 1 required");
  const Eigen::Index p = params.gamma1.p();
  const Matrix& g1 = params.gamma1.cols();
  const Matrix& g2 = params.gamma2.cols();
  RandomStream rs(seed);
  Dataset data;
  data.x.resize(ys.size(), p);
  data.y = ys;
  Vector eps(p);
  for (Eigen::Index i = 0; i < ys.size(); ++i) {
    const Matrix tau_y = params.tau.at(ys(i));
    detail::check_profile_admissible(tau_y);
    for (Eigen::Index k = 0; k < p; ++k) eps(k) = rs.normal();
    data.x.row(i) = (params.mu + g1 * params.nu.at(ys(i)) +
                     params.sigma2 * (g2 * (tau_y * (g2.transpose() * eps)) + eps))
                        .transpose();
  }
  return data;
}

/// ys drawn i.i.d. N(mean, sd^2); the Y-marginal of both worked examples.
inline Vector sample_normal_ys(Eigen::Index n, double mean, double sd, RandomStream& rs) {
  Vector ys(n);
  for (Eigen::Index i = 0; i < n; ++i) ys(i) = mean + sd * rs.normal();
  return ys;
}

}  // namespace pvcdr
