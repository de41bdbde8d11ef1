#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pvcdr/linalg.hpp"
#include "pvcdr/parallel.hpp"
#include "pvcdr/randcov.hpp"
#include "pvcdr/rng.hpp"

namespace pvcdr {

// Monte Carlo experiment: nature draws a covariance Sigma and, independently,
// a linear relation Y = beta'X + eps. How often does the projection of X onto
// the top eigenvector of Sigma carry the largest correlation with Y?

enum class CorrelationMode { Absolute, Signed };
enum class CorrelationEstimator { MomentSample, PopulationOracle };

struct ConjectureConfig {
  CovScheme scheme;     // carries p and the scale bound c
  int n_outer = 200;    // number of (Sigma, beta) draws
  int m_inner = 200;    // per-trial (X, Y) sample size
  double noise_var = 0.0;  // var(eps); beta is always N(0, I_p)
  CorrelationMode mode = CorrelationMode::Absolute;
  CorrelationEstimator estimator = CorrelationEstimator::MomentSample;
  SeedSpec seed;
  bool keep_trials = false;

  int p() const { return scheme.p; }

  void validate() const {
    scheme.validate();
    if (n_outer < 1) throw std::invalid_argument("ConjectureConfig: n_outer >= 1 required");
    if (estimator == CorrelationEstimator::MomentSample && m_inner < 3)
      throw std::invalid_argument("ConjectureConfig: m_inner >= 3 required for the moment estimator");
    if (noise_var < 0.0) throw std::invalid_argument("ConjectureConfig: noise_var >= 0 required");
  }
};

struct TrialRecord {
  Vector rho;  // correlations along the eigenvectors of the drawn Sigma
  int winner;  // 0-based index of the largest |rho_i| (or rho_i in Signed mode)
};

struct ConjectureResult {
  double prob_first_wins = 0.0;
  double mc_stderr = 0.0;
  std::vector<std::int64_t> winner_histogram;
  int trials = 0;
  std::vector<TrialRecord> trial_records;  // populated when keep_trials
};

/// Population correlations between v_i'X and Y = beta'X + eps, conditioning
/// on (beta, Sigma):  rho_i = sqrt(lambda_i) v_i'beta / sqrt(beta'Sigma beta
/// + noise_var), ordered by the descending eigenvalues of Sigma. With zero
/// noise the rho_i are direction cosines, so sum rho_i^2 = 1.
inline Vector population_correlations(const Vector& beta, const SymMatrix& sigma,
                                      double noise_var) {
  if (beta.size() != sigma.dim())
    throw std::invalid_argument("population_correlations: dimension mismatch");
  const EigenDecomp eig = eigen_sym(sigma);
  const double denom = beta.dot(sigma.mat() * beta) + noise_var;
  if (denom <= 0.0) throw std::runtime_error("degenerate response");
  Vector rho(beta.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    const double lam = std::max(eig.values(i), 0.0);
    rho(i) = std::sqrt(lam) * eig.vectors.col(i).dot(beta) / std::sqrt(denom);
  }
  return rho;
}

/// Method-of-moments correlations between each v_i'x and y, projecting onto
/// the eigenvectors of the Sigma that generated the data.
inline Vector sample_correlations(const Matrix& x, const Vector& y,
                                  const EigenDecomp& eig) {
  if (x.rows() != y.size() || x.cols() != eig.vectors.rows())
    throw std::invalid_argument("sample_correlations: dimension mismatch");
  if (y.size() < 3) throw std::invalid_argument("sample_correlations: m >= 3 required");
  const Matrix proj = x * eig.vectors;  // column i holds v_i'x_j
  Vector rho(proj.cols());
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    rho(i) = pearson_correlation(proj.col(i), y);
  return rho;
}

namespace detail {

inline int pick_winner(const Vector& rho, CorrelationMode mode) {
  int best = 0;
  double best_val = mode == CorrelationMode::Absolute ? std::abs(rho(0)) : rho(0);
  for (Eigen::Index i = 1; i < rho.size(); ++i) {
    const double v = mode == CorrelationMode::Absolute ? std::abs(rho(i)) : rho(i);
    if (v > best_val) {
      best = static_cast<int>(i);
      best_val = v;
    }
  }
  return best;
}

inline TrialRecord run_trial(const ConjectureConfig& cfg, std::uint64_t index) {
  RandomStream rs(substream(cfg.seed, index));
  const SymMatrix sigma = sample_sigma(cfg.scheme, rs);
  Vector beta(cfg.p());
  for (Eigen::Index i = 0; i < beta.size(); ++i) beta(i) = rs.normal();

  Vector rho;
  if (cfg.estimator == CorrelationEstimator::PopulationOracle) {
    rho = population_correlations(beta, sigma, cfg.noise_var);
  } else {
    const EigenDecomp eig = eigen_sym(sigma);
    Matrix lfac = eig.vectors;
    for (Eigen::Index j = 0; j < lfac.cols(); ++j)
      lfac.col(j) *= std::sqrt(std::max(eig.values(j), 0.0));
    Matrix x(cfg.m_inner, cfg.p());
    Vector y(cfg.m_inner);
    Vector z(cfg.p());
    const double noise_sd = std::sqrt(cfg.noise_var);
    for (int j = 0; j < cfg.m_inner; ++j) {
      for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = rs.normal();
      x.row(j) = (lfac * z).transpose();
      y(j) = x.row(j).dot(beta);
      if (cfg.noise_var > 0.0) y(j) += noise_sd * rs.normal();
    }
    rho = sample_correlations(x, y, eig);
  }
  const int winner = pick_winner(rho, cfg.mode);
  return TrialRecord{std::move(rho), winner};
}

}  // namespace detail

/// Runs the full experiment. Trials are independent with per-trial seeds
/// derived from (seed, trial index), so the result does not depend on the
/// worker count.
inline ConjectureResult run_conjecture(const ConjectureConfig& cfg, unsigned threads = 0) {
  cfg.validate();
  std::vector<int> winners(cfg.n_outer);
  std::vector<TrialRecord> records(cfg.keep_trials ? cfg.n_outer : 0);
  parallel_for(
      cfg.n_outer,
      [&](std::int64_t t) {
        TrialRecord rec = detail::run_trial(cfg, static_cast<std::uint64_t>(t));
        winners[t] = rec.winner;
        if (cfg.keep_trials) records[t] = std::move(rec);
      },
      threads);

  ConjectureResult out;
  out.trials = cfg.n_outer;
  out.winner_histogram.assign(cfg.p(), 0);
  for (int w : winners) ++out.winner_histogram[w];
  out.prob_first_wins =
      static_cast<double>(out.winner_histogram[0]) / static_cast<double>(cfg.n_outer);
  out.mc_stderr = std::sqrt(out.prob_first_wins * (1.0 - out.prob_first_wins) /
                            static_cast<double>(cfg.n_outer));
  out.trial_records = std::move(records);
  return out;
}

}  // namespace pvcdr
