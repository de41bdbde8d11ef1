#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pvcdr/likelihood.hpp"
#include "pvcdr/linalg.hpp"
#include "pvcdr/models.hpp"
#include "pvcdr/parallel.hpp"
#include "pvcdr/rng.hpp"
#include "pvcdr/stiefel.hpp"

namespace pvcdr {

struct FitOptions {
  int max_iters = 500;
  double grad_tol = 1e-7;  // on the projected-gradient Frobenius norm
  int n_starts = 8;
  bool estimate_sigma2 = false;
  double sigma2 = 1.0;  // fixed value, or the starting value when estimating
  double step_init = 1.0;
  SeedSpec seed;
  unsigned threads = 0;

  void validate() const {
    if (max_iters < 1) throw std::invalid_argument("FitOptions: max_iters >= 1 required");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("FitOptions: grad_tol > 0 required");
    if (n_starts < 1) throw std::invalid_argument("FitOptions: n_starts >= 1 required");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("FitOptions: sigma2 > 0 required");
  }
};

struct FitResult {
  StiefelFrame gamma_hat;  // model 3 frame, or the location frame for model 5
  std::optional<StiefelFrame> gamma1_hat;
  std::optional<StiefelFrame> gamma2_hat;
  std::optional<MeanProfile> nu_mean_hat;  // fitted linear mean coefficients
  double sigma2_hat = 1.0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  int start_index = 0;
};

/// Which mean-profile family fit_model5 works with: Linear has its slopes and
/// intercepts re-estimated in closed form each sweep; Fixed is held constant.
struct MeanFamily {
  enum class Kind { Linear, Fixed };
  Kind kind = Kind::Linear;
  std::optional<MeanProfile> fixed;

  static MeanFamily linear() { return MeanFamily{}; }
  static MeanFamily fixed_profile(MeanProfile p) {
    return MeanFamily{Kind::Fixed, std::move(p)};
  }
};

namespace detail {

inline double profile_sigma2_core(const Matrix& rows, const Matrix& gamma,
                                  const DispersionTerms& t) {
  const Matrix proj = rows * gamma;
  double bracket = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    bracket += rows.row(i).squaredNorm() + proj.row(i) * t.w[i] * proj.row(i).transpose();
  if (!(bracket > 0.0)) throw std::runtime_error("degenerate scale");
  return std::sqrt(bracket / static_cast<double>(rows.rows() * rows.cols()));
}

struct AscentState {
  Matrix gamma;
  double sigma2 = 1.0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
};

constexpr double kArmijoSlope = 1e-4;
constexpr double kMinStep = 1e-14;

// One multistart leg for model 3: projected-gradient ascent with Armijo
// backtracking and QR retraction. Every accepted step increases the
// objective; termination is grad_tol, max_iters, or a stalled line search.
inline AscentState ascend_model3(const Matrix& x, const DispersionTerms& terms,
                                 const FitOptions& opts, Matrix gamma0) {
  AscentState s;
  s.gamma = std::move(gamma0);
  s.sigma2 = opts.sigma2;
  if (opts.estimate_sigma2) s.sigma2 = profile_sigma2_core(x, s.gamma, terms);
  s.loglik = loglik_core(x, s.gamma, s.sigma2, terms).total;

  for (int it = 1; it <= opts.max_iters; ++it) {
    const Matrix grad = grad_core(x, s.gamma, s.sigma2, terms);
    const Matrix xi = stiefel_tangent(s.gamma, grad);
    const double gn2 = xi.squaredNorm();
    if (std::sqrt(gn2) <= opts.grad_tol) {
      s.converged = true;
      break;
    }
    bool accepted = false;
    for (double t = opts.step_init; t >= kMinStep; t *= 0.5) {
      const Matrix cand = stiefel_retract(s.gamma, t * xi);
      const double fc = loglik_core(x, cand, s.sigma2, terms).total;
      if (fc >= s.loglik + kArmijoSlope * t * gn2) {
        s.gamma = cand;
        s.loglik = fc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (opts.estimate_sigma2) {
      s.sigma2 = profile_sigma2_core(x, s.gamma, terms);
      s.loglik = loglik_core(x, s.gamma, s.sigma2, terms).total;
    }
    s.iterations = it;
  }
  return s;
}

// Winner by (loglik, lower start index); scheduling-independent.
inline int pick_start(const std::vector<AscentState>& states) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(states.size()); ++k)
    if (states[k].loglik > states[best].loglik) best = k;
  return best;
}

}  // namespace detail

/// Profile maximizer of the model-3 likelihood in sigma^2 for fixed Gamma:
/// sigma^4 = (1/(n p)) sum_i [ |x_i|^2 + (G'x_i)' ((nu_i + I)^{-2} - I) (G'x_i) ].
inline double profile_sigma2(const Dataset& data, const StiefelFrame& gamma,
                             const VarianceProfile& nu) {
  data.validate();
  const auto terms = detail::build_dispersion_terms(nu, data.y);
  return detail::profile_sigma2_core(data.x, gamma.cols(), terms);
}

/// Global maximizer of the model-3 likelihood over unit vectors for d = 1 and
/// fixed sigma^2. The Gamma-dependent term is sum_i w_i (g'x_i)^2 with
/// w_i = (nu_i + 1)^{-2} - 1, so the optimal direction is the top eigenvector
/// of M = sum_i (-w_i) x_i x_i'.
inline Vector closed_form_d1(const Dataset& data, const VarianceProfile& nu,
                             [[maybe_unused]] double sigma2 = 1.0) {
  data.validate();
  if (nu.d() != 1) throw std::invalid_argument("closed_form_d1: d == 1 required");
  const auto terms = detail::build_dispersion_terms(nu, data.y);
  Matrix m = Matrix::Zero(data.p(), data.p());
  for (Eigen::Index i = 0; i < data.n(); ++i)
    m -= terms.w[i](0, 0) * (data.x.row(i).transpose() * data.x.row(i));
  if (m.cwiseAbs().maxCoeff() == 0.0)
    throw std::domain_error("gamma unidentified: nu vanishes on sample");
  return eigen_sym(SymMatrix(m)).vectors.col(0);
}

/// Maximum-likelihood frame for model 3 by multistart Stiefel ascent.
inline FitResult fit_model3(const Dataset& data, const VarianceProfile& nu, int d,
                            const FitOptions& opts) {
  data.validate();
  opts.validate();
  if (d < 1 || d >= data.p()) throw std::invalid_argument("fit_model3: 1 <= d < p required");
  if (nu.d() != d) throw std::invalid_argument("fit_model3: nu dimension must equal d");
  const auto terms = detail::build_dispersion_terms(nu, data.y);

  std::vector<detail::AscentState> states(opts.n_starts);
  parallel_for(
      opts.n_starts,
      [&](std::int64_t k) {
        RandomStream rs(substream(opts.seed, static_cast<std::uint64_t>(k)));
        states[k] = detail::ascend_model3(data.x, terms, opts,
                                          random_stiefel(data.p(), d, rs));
      },
      opts.threads);

  const int win = detail::pick_start(states);
  detail::AscentState& s = states[win];
  FitResult out{StiefelFrame(std::move(s.gamma))};
  out.sigma2_hat = s.sigma2;
  out.loglik = s.loglik;
  out.iterations = s.iterations;
  out.converged = s.converged;
  out.start_index = win;
  return out;
}

namespace detail {

struct Model5State {
  Matrix gamma1, gamma2;  // kept equal when the frame is shared
  Vector slopes, intercepts;
  double sigma2 = 1.0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct Model5Problem {
  const Dataset& data;
  Vector mu;
  MeanFamily mean_family;
  const DispersionTerms& terms;
  bool shared = false;
  int d1 = 1, d2 = 1;

  Vector mean_at(const Model5State& s, double y) const {
    if (mean_family.kind == MeanFamily::Kind::Fixed) return mean_family.fixed->at(y);
    return s.slopes * y + s.intercepts;
  }

  Matrix residuals(const Model5State& s, const Matrix& gamma1) const {
    Matrix r(data.n(), data.p());
    for (Eigen::Index i = 0; i < data.n(); ++i)
      r.row(i) = data.x.row(i) - mu.transpose() -
                 (gamma1 * mean_at(s, data.y(i))).transpose();
    return r;
  }

  double objective(const Model5State& s, const Matrix& gamma1,
                   const Matrix& gamma2) const {
    return loglik_core(residuals(s, gamma1), gamma2, s.sigma2, terms).total;
  }
};

// Weighted least squares for the linear mean coefficients given the frames:
// minimizes sum_i (z_i - G1(a + b y_i))' C_i (z_i - G1(a + b y_i)) with
// C_i = I + G2 W_i G2', solved from its 2d1 x 2d1 normal equations.
inline void update_mean_coeffs(const Model5Problem& prob, Model5State& s) {
  if (prob.mean_family.kind != MeanFamily::Kind::Linear) return;
  const int d1 = prob.d1;
  const Matrix cross = s.gamma1.transpose() * s.gamma2;  // d1 x d2
  Matrix lhs = Matrix::Zero(2 * d1, 2 * d1);
  Vector rhs = Vector::Zero(2 * d1);
  for (Eigen::Index i = 0; i < prob.data.n(); ++i) {
    const Vector z = prob.data.x.row(i).transpose() - prob.mu;
    const Vector czi =
        s.gamma1.transpose() * z + cross * (prob.terms.w[i] * (s.gamma2.transpose() * z));
    const Matrix a_i =
        Matrix::Identity(d1, d1) + cross * prob.terms.w[i] * cross.transpose();
    const double y = prob.data.y(i);
    lhs.topLeftCorner(d1, d1) += a_i;
    lhs.topRightCorner(d1, d1) += y * a_i;
    lhs.bottomLeftCorner(d1, d1) += y * a_i;
    lhs.bottomRightCorner(d1, d1) += y * y * a_i;
    rhs.head(d1) += czi;
    rhs.tail(d1) += y * czi;
  }
  const Vector theta = lhs.colPivHouseholderQr().solve(rhs);
  s.intercepts = theta.head(d1);
  s.slopes = theta.tail(d1);
}

// Euclidean gradients of the objective at the current state, location block
// and dispersion block (see grad_gamma_model5).
inline std::pair<Matrix, Matrix> model5_grads(const Model5Problem& prob,
                                              const Model5State& s) {
  const Matrix resid = prob.residuals(s, s.gamma1);
  const double inv_s4 = 1.0 / (s.sigma2 * s.sigma2);
  const Matrix proj = resid * s.gamma2;
  Matrix nu_rows(prob.data.n(), prob.d1);
  Matrix weighted(prob.data.n(), prob.d2);
  for (Eigen::Index i = 0; i < prob.data.n(); ++i) {
    nu_rows.row(i) = prob.mean_at(s, prob.data.y(i)).transpose();
    weighted.row(i) = proj.row(i) * prob.terms.w[i];
  }
  Matrix g1 = inv_s4 * (resid.transpose() * nu_rows +
                        s.gamma2 * (weighted.transpose() * nu_rows));
  Matrix g2 = -inv_s4 * (resid.transpose() * weighted);
  return {std::move(g1), std::move(g2)};
}

// Armijo step along a tangent direction for one frame; `which` selects the
// block (0 = gamma1, 1 = gamma2, 2 = shared). Returns false when the line
// search stalls.
inline bool model5_frame_step(const Model5Problem& prob, Model5State& s, int which,
                              const Matrix& xi, const FitOptions& opts) {
  const double gn2 = xi.squaredNorm();
  for (double t = opts.step_init; t >= kMinStep; t *= 0.5) {
    Matrix cand1 = s.gamma1, cand2 = s.gamma2;
    if (which == 0) {
      cand1 = stiefel_retract(s.gamma1, t * xi);
    } else if (which == 1) {
      cand2 = stiefel_retract(s.gamma2, t * xi);
    } else {
      cand1 = stiefel_retract(s.gamma1, t * xi);
      cand2 = cand1;
    }
    const double fc = prob.objective(s, cand1, cand2);
    if (fc >= s.loglik + kArmijoSlope * t * gn2) {
      s.gamma1 = std::move(cand1);
      s.gamma2 = std::move(cand2);
      s.loglik = fc;
      return true;
    }
  }
  return false;
}

inline Model5State ascend_model5(const Model5Problem& prob, const FitOptions& opts,
                                 Model5State s) {
  update_mean_coeffs(prob, s);
  if (opts.estimate_sigma2)
    s.sigma2 = profile_sigma2_core(prob.residuals(s, s.gamma1), s.gamma2, prob.terms);
  s.loglik = prob.objective(s, s.gamma1, s.gamma2);

  for (int it = 1; it <= opts.max_iters; ++it) {
    const auto [g1, g2] = model5_grads(prob, s);
    bool accepted = false;
    double grad_norm2 = 0.0;
    if (prob.shared) {
      const Matrix xi = stiefel_tangent(s.gamma1, g1 + g2);
      grad_norm2 = xi.squaredNorm();
      if (std::sqrt(grad_norm2) <= opts.grad_tol) {
        s.converged = true;
        break;
      }
      accepted = model5_frame_step(prob, s, 2, xi, opts);
    } else {
      const Matrix xi1 = stiefel_tangent(s.gamma1, g1);
      const Matrix xi2 = stiefel_tangent(s.gamma2, g2);
      grad_norm2 = xi1.squaredNorm() + xi2.squaredNorm();
      if (std::sqrt(grad_norm2) <= opts.grad_tol) {
        s.converged = true;
        break;
      }
      const bool a1 = xi1.squaredNorm() > 0.0 && model5_frame_step(prob, s, 0, xi1, opts);
      const Matrix xi2b = stiefel_tangent(s.gamma2, model5_grads(prob, s).second);
      const bool a2 = xi2b.squaredNorm() > 0.0 && model5_frame_step(prob, s, 1, xi2b, opts);
      accepted = a1 || a2;
    }
    if (!accepted) break;
    update_mean_coeffs(prob, s);
    if (opts.estimate_sigma2)
      s.sigma2 = profile_sigma2_core(prob.residuals(s, s.gamma1), s.gamma2, prob.terms);
    s.loglik = prob.objective(s, s.gamma1, s.gamma2);
    s.iterations = it;
  }
  return s;
}

inline int pick_start_model5(const std::vector<Model5State>& states) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(states.size()); ++k)
    if (states[k].loglik > states[best].loglik) best = k;
  return best;
}

}  // namespace detail

/// Maximum-likelihood fit of model 5: closed-form mean-coefficient updates
/// alternate with projected-gradient steps in the frame(s), multistarted.
/// mu is treated as known (default zero).
inline FitResult fit_model5(const Dataset& data, const MeanFamily& mean_family,
                            const VarianceProfile& tau, int d1, int d2,
                            bool shared_frame, const FitOptions& opts,
                            const Vector& mu = Vector()) {
  data.validate();
  opts.validate();
  if (shared_frame && d1 != d2)
    throw std::invalid_argument("fit_model5: shared frame requires d1 == d2");
  if (d1 < 1 || d2 < 1 || (shared_frame ? d1 : d1 + d2) >= data.p())
    throw std::invalid_argument("fit_model5: frame dimensions incompatible with p");
  if (tau.d() != d2) throw std::invalid_argument("fit_model5: tau dimension must equal d2");
  if (mean_family.kind == MeanFamily::Kind::Fixed && mean_family.fixed->d() != d1)
    throw std::invalid_argument("fit_model5: fixed mean profile dimension must equal d1");
  const Vector mu_known = mu.size() ? mu : Vector::Zero(data.p());
  if (mu_known.size() != data.p())
    throw std::invalid_argument("fit_model5: mu dimension mismatch");
  const auto terms = detail::build_dispersion_terms(tau, data.y);

  detail::Model5Problem prob{data, mu_known, mean_family, terms, shared_frame, d1, d2};

  std::vector<detail::Model5State> states(opts.n_starts);
  parallel_for(
      opts.n_starts,
      [&](std::int64_t k) {
        RandomStream rs(substream(opts.seed, static_cast<std::uint64_t>(k)));
        detail::Model5State s;
        s.gamma1 = random_stiefel(data.p(), d1, rs);
        s.gamma2 = shared_frame ? s.gamma1 : random_stiefel(data.p(), d2, rs);
        s.slopes = Vector::Zero(d1);
        s.intercepts = Vector::Zero(d1);
        s.sigma2 = opts.sigma2;
        states[k] = detail::ascend_model5(prob, opts, std::move(s));
      },
      opts.threads);

  const int win = detail::pick_start_model5(states);
  detail::Model5State& s = states[win];
  StiefelFrame f1(s.gamma1);
  StiefelFrame f2(shared_frame ? s.gamma1 : s.gamma2);
  FitResult out{f1};
  out.gamma1_hat = std::move(f1);
  out.gamma2_hat = std::move(f2);
  if (mean_family.kind == MeanFamily::Kind::Linear)
    out.nu_mean_hat = MeanProfile::linear(s.slopes, s.intercepts);
  out.sigma2_hat = s.sigma2;
  out.loglik = s.loglik;
  out.iterations = s.iterations;
  out.converged = s.converged;
  out.start_index = win;
  return out;
}

}  // namespace pvcdr
