// pvcdr command-line tool: simulate datasets from the variance-component
// inverse-regression models, fit frames by maximum likelihood, run the
// PCA-vs-response Monte Carlo experiment, check sufficient-reduction
// diagnostics, and export scatterplot figures.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include <pvcdr/pvcdr.hpp>

namespace {

using pvcdr::json;
using pvcdr::Matrix;
using pvcdr::Vector;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw pvcdr::IoError("cannot open for writing: " + path);
  os << content;
  if (!os) throw pvcdr::IoError("write failed: " + path);
}

void emit_json(const std::string& out_path, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
}

pvcdr::VarianceProfile parse_profile_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(spec.substr(start));
      break;
    }
    parts.push_back(spec.substr(start, colon - start));
    start = colon + 1;
  }
  auto nums = [](const std::string& csv) {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
      const auto comma = csv.find(',', pos);
      const std::string tok =
          csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      v.push_back(std::stod(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return v;
  };
  if (parts[0] == "absdev" && parts.size() == 3)
    return pvcdr::VarianceProfile::abs_dev(std::stod(parts[1]), std::stod(parts[2]));
  if (parts[0] == "diag_absdev" && parts.size() == 3) {
    const auto c = nums(parts[1]), s = nums(parts[2]);
    return pvcdr::VarianceProfile::diag_abs_dev(
        Eigen::Map<const Vector>(c.data(), c.size()),
        Eigen::Map<const Vector>(s.data(), s.size()));
  }
  throw CLI::ValidationError("--nu", "expected absdev:CENTER:SCALE or diag_absdev:c1,..:s1,..");
}

// Frame argument: inline comma-separated numbers (column-major), or a JSON
// file with a gamma_hat/gamma field.
Matrix parse_frame_spec(const std::string& spec, Eigen::Index p, Eigen::Index d) {
  if (spec.find(',') != std::string::npos) {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      const auto comma = spec.find(',', pos);
      v.push_back(std::stod(
          spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (static_cast<Eigen::Index>(v.size()) != p * d)
      throw std::invalid_argument("frame literal needs p*d numbers");
    Matrix m(p, d);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < p; ++i) m(i, j) = v[k++];
    return m;
  }
  return pvcdr::frame_from_json(pvcdr::load_json_file(spec)).cols();
}

json report_to_json(const pvcdr::IndependenceReport& rep) {
  json j;
  json stats = json::array();
  for (Eigen::Index i = 0; i < rep.stats.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < rep.stats.cols(); ++k) row.push_back(rep.stats(i, k));
    stats.push_back(std::move(row));
  }
  j["stats"] = std::move(stats);
  j["max_abs"] = rep.max_abs;
  j["n"] = rep.n;
  j["threshold"] = rep.threshold;
  j["pass"] = rep.pass;
  if (rep.signal_stats.size()) {
    json sig = json::array();
    for (Eigen::Index i = 0; i < rep.signal_stats.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < rep.signal_stats.cols(); ++k)
        row.push_back(rep.signal_stats(i, k));
      sig.push_back(std::move(row));
    }
    j["signal_stats"] = std::move(sig);
    j["signal_max"] = rep.signal_max;
  }
  return j;
}

struct CommonSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  pvcdr::SeedSpec spec() const { return pvcdr::SeedSpec{seed, stream}; }
};

// ---------------------------------------------------------------------------

struct ConjectureCmd {
  std::string scheme = "rotation";
  int p = 2, n = 200, m = 200;
  double c = 1000.0, noise_var = 0.0;
  std::string mode = "abs", estimator = "sample", out;
  CommonSeed seed;
  unsigned threads = 0;

  int run() const {
    pvcdr::ConjectureConfig cfg;
    cfg.scheme.kind = scheme == "entry" ? pvcdr::CovKind::Entry : pvcdr::CovKind::Rotation;
    cfg.scheme.c = c;
    cfg.scheme.p = p;
    cfg.n_outer = n;
    cfg.m_inner = m;
    cfg.noise_var = noise_var;
    cfg.mode = mode == "signed" ? pvcdr::CorrelationMode::Signed
                                : pvcdr::CorrelationMode::Absolute;
    cfg.estimator = estimator == "oracle" ? pvcdr::CorrelationEstimator::PopulationOracle
                                          : pvcdr::CorrelationEstimator::MomentSample;
    cfg.seed = seed.spec();
    const pvcdr::ConjectureResult res = pvcdr::run_conjecture(cfg, threads);

    json j;
    j["prob_first_wins"] = res.prob_first_wins;
    j["mc_stderr"] = res.mc_stderr;
    j["winner_histogram"] = res.winner_histogram;
    j["trials"] = res.trials;
    j["config"] = {{"command", "conjecture"}, {"scheme", scheme},   {"p", p},
                   {"n", n},                  {"m", m},             {"c", c},
                   {"mode", mode},            {"estimator", estimator},
                   {"noise_var", noise_var},  {"seed", seed.seed},  {"stream", seed.stream}};
    emit_json(out, j);
    return 0;
  }
};

struct SimulateCmd {
  int model = 3;
  std::string params_path, out;
  int n = 0;
  double y_mean = 0.0, y_sd = 1.0;
  CommonSeed seed;

  int run() const {
    if (n <= 0) throw std::invalid_argument("n must be positive");
    if (y_sd < 0.0) throw std::invalid_argument("y-sd must be non-negative");
    const json pj = pvcdr::load_json_file(params_path);
    if (pj.contains("model") && pj.at("model").get<int>() != model)
      throw std::invalid_argument("params file is for model " +
                                  std::to_string(pj.at("model").get<int>()));
    pvcdr::RandomStream ys_stream(pvcdr::substream(seed.spec(), 0));
    const Vector ys = pvcdr::sample_normal_ys(n, y_mean, y_sd, ys_stream);
    const pvcdr::SeedSpec eps_seed = pvcdr::substream(seed.spec(), 1);
    pvcdr::Dataset data;
    if (model == 3)
      data = pvcdr::sample_model3(pvcdr::model3_params_from_json(pj), ys, eps_seed);
    else if (model == 5)
      data = pvcdr::sample_model5(pvcdr::model5_params_from_json(pj), ys, eps_seed);
    else
      throw std::invalid_argument("model must be 3 or 5");
    pvcdr::write_dataset_csv(out, data);
    return 0;
  }
};

struct FitCmd {
  int model = 3;
  std::string data_path, out;
  int d = 1, d2 = -1;
  bool shared_frame = false;
  std::string nu_spec = "absdev:0:1";
  std::string nu_mean = "linear";
  std::string sigma2_spec = "fixed:1.0";
  int starts = 8, max_iters = 500;
  double grad_tol = 1e-7;
  std::string true_gamma;
  CommonSeed seed;
  unsigned threads = 0;

  int run() const {
    const pvcdr::Dataset data = pvcdr::read_dataset_csv(data_path);
    const pvcdr::VarianceProfile nu = parse_profile_spec(nu_spec);

    pvcdr::FitOptions opts;
    opts.max_iters = max_iters;
    opts.grad_tol = grad_tol;
    opts.n_starts = starts;
    opts.step_init = 1.0;
    opts.seed = seed.spec();
    opts.threads = threads;
    if (sigma2_spec == "estimate") {
      opts.estimate_sigma2 = true;
    } else if (sigma2_spec.rfind("fixed:", 0) == 0) {
      opts.estimate_sigma2 = false;
      opts.sigma2 = std::stod(sigma2_spec.substr(6));
    } else {
      throw CLI::ValidationError("--sigma2", "expected fixed:VALUE or estimate");
    }

    pvcdr::FitResult res = [&] {
      if (model == 3) return pvcdr::fit_model3(data, nu, d, opts);
      if (model != 5) throw std::invalid_argument("model must be 3 or 5");
      if (nu_mean != "linear")
        throw std::invalid_argument("only the linear mean family is fittable");
      const int dd2 = d2 > 0 ? d2 : d;
      return pvcdr::fit_model5(data, pvcdr::MeanFamily::linear(), nu, d, dd2,
                               shared_frame, opts);
    }();

    json j;
    j["model"] = model;
    j["p"] = data.p();
    j["d"] = res.gamma_hat.d();
    j["gamma_hat"] = pvcdr::detail::matrix_to_colmajor(res.gamma_hat.cols());
    j["sigma2_hat"] = res.sigma2_hat;
    j["loglik"] = res.loglik;
    j["iterations"] = res.iterations;
    j["converged"] = res.converged;
    j["start_index"] = res.start_index;
    if (model == 5) {
      j["shared_frame"] = shared_frame;
      j["gamma1_hat"] = pvcdr::detail::matrix_to_colmajor(res.gamma1_hat->cols());
      j["gamma2_hat"] = pvcdr::detail::matrix_to_colmajor(res.gamma2_hat->cols());
      if (res.nu_mean_hat) j["nu_mean_hat"] = pvcdr::mean_profile_to_json(*res.nu_mean_hat);
    }
    if (!true_gamma.empty()) {
      const Matrix ref = parse_frame_spec(true_gamma, data.p(), res.gamma_hat.d());
      j["subspace_angle_to"] =
          pvcdr::subspace_angle(res.gamma_hat, pvcdr::StiefelFrame(ref));
    }
    j["config"] = {{"command", "fit"},       {"model", model},       {"data", data_path},
                   {"d", d},                 {"d2", d2 > 0 ? d2 : d},
                   {"shared_frame", shared_frame},                   {"nu", nu_spec},
                   {"nu_mean", nu_mean},     {"sigma2", sigma2_spec},
                   {"starts", starts},       {"max_iters", max_iters},
                   {"grad_tol", grad_tol},   {"seed", seed.seed},    {"stream", seed.stream}};
    emit_json(out, j);
    return 0;
  }
};

struct DiagnoseCmd {
  std::string data_path, gamma_path, out;

  int run() const {
    const pvcdr::Dataset data = pvcdr::read_dataset_csv(data_path);
    const pvcdr::StiefelFrame gamma =
        pvcdr::frame_from_json(pvcdr::load_json_file(gamma_path));
    json j = report_to_json(pvcdr::independence_check(data, gamma));
    j["dispersion"] = report_to_json(pvcdr::dispersion_check(data, gamma));
    j["config"] = {{"command", "diagnose"}, {"data", data_path}, {"gamma", gamma_path}};
    emit_json(out, j);
    return 0;
  }
};

struct PlotCmd {
  std::string data_path, gamma_spec = "x1", out;

  int run() const {
    const pvcdr::Dataset data = pvcdr::read_dataset_csv(data_path);
    Vector direction;
    std::string label = "g'X";
    if (gamma_spec == "x1") {
      direction = Vector::Zero(data.p());
      direction(0) = 1.0;
      label = "X1";
    } else {
      json fj;
      Matrix cols;
      if (gamma_spec.find(',') != std::string::npos) {
        cols = parse_frame_spec(gamma_spec, data.p(), 1);
      } else {
        fj = pvcdr::load_json_file(gamma_spec);
        cols = pvcdr::frame_from_json(fj).cols();
      }
      if (cols.cols() != 1) throw std::invalid_argument("plot supports d=1 only");
      if (cols.rows() != data.p())
        throw std::invalid_argument("frame dimension does not match the data");
      direction = cols.col(0);
    }
    write_text_file(out, pvcdr::two_panel_scatter_svg(data, direction, label));
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variance-component inverse regression: simulation, MLE, diagnostics"};
  app.require_subcommand(1);

  ConjectureCmd conj;
  auto* sc = app.add_subcommand("conjecture",
                                "estimate how often the first principal component of X "
                                "has the largest correlation with Y");
  sc->add_option("--scheme", conj.scheme, "covariance generator")
      ->check(CLI::IsMember({"rotation", "entry"}));
  sc->add_option("--p", conj.p, "dimension of X");
  sc->add_option("--n", conj.n, "outer (Sigma, beta) draws");
  sc->add_option("--m", conj.m, "inner (X, Y) sample size per trial");
  sc->add_option("--c", conj.c, "upper bound of the eigenvalue distribution");
  sc->add_option("--mode", conj.mode, "compare |rho| or signed rho")
      ->check(CLI::IsMember({"abs", "signed"}));
  sc->add_option("--estimator", conj.estimator, "moment-sample or population oracle")
      ->check(CLI::IsMember({"sample", "oracle"}));
  sc->add_option("--noise-var", conj.noise_var, "variance of eps in Y = beta'X + eps");
  sc->add_option("--seed", conj.seed.seed, "master seed");
  sc->add_option("--stream", conj.seed.stream, "stream id");
  sc->add_option("--threads", conj.threads, "worker cap (default: PVCDR_THREADS or cores)");
  sc->add_option("--out", conj.out, "output JSON path (stdout when omitted)");

  SimulateCmd sim;
  auto* ss = app.add_subcommand("simulate", "draw a dataset from model 3 or model 5");
  ss->add_option("--model", sim.model, "3 or 5");
  ss->add_option("--params", sim.params_path, "model parameter JSON")->required();
  ss->add_option("--n", sim.n, "number of observations")->required();
  ss->add_option("--y-mean", sim.y_mean, "mean of the normal Y-marginal");
  ss->add_option("--y-sd", sim.y_sd, "sd of the normal Y-marginal");
  ss->add_option("--seed", sim.seed.seed, "master seed");
  ss->add_option("--stream", sim.seed.stream, "stream id");
  ss->add_option("--out", sim.out, "output CSV path")->required();

  FitCmd fit;
  auto* sf = app.add_subcommand("fit", "maximum-likelihood frame estimation");
  sf->add_option("--model", fit.model, "3 or 5");
  sf->add_option("--data", fit.data_path, "dataset CSV")->required();
  sf->add_option("--d", fit.d, "frame dimension (d1 for model 5)");
  sf->add_option("--d2", fit.d2, "dispersion frame dimension (model 5)");
  sf->add_flag("--shared-frame", fit.shared_frame, "location and dispersion share one frame");
  sf->add_option("--nu", fit.nu_spec, "dispersion profile, e.g. absdev:0:1");
  sf->add_option("--nu-mean", fit.nu_mean, "mean profile family (model 5)");
  sf->add_option("--sigma2", fit.sigma2_spec, "fixed:VALUE or estimate");
  sf->add_option("--starts", fit.starts, "multistart count");
  sf->add_option("--max-iters", fit.max_iters, "iteration cap per start");
  sf->add_option("--grad-tol", fit.grad_tol, "projected-gradient stopping norm");
  sf->add_option("--true-gamma", fit.true_gamma,
                 "reference frame (inline numbers or JSON file) for subspace_angle_to");
  sf->add_option("--seed", fit.seed.seed, "master seed");
  sf->add_option("--stream", fit.seed.stream, "stream id");
  sf->add_option("--threads", fit.threads, "worker cap");
  sf->add_option("--out", fit.out, "output JSON path (stdout when omitted)");

  DiagnoseCmd diag;
  auto* sd = app.add_subcommand("diagnose", "sufficient-reduction independence checks");
  sd->add_option("--data", diag.data_path, "dataset CSV")->required();
  sd->add_option("--gamma", diag.gamma_path, "frame JSON (fit output or params)")->required();
  sd->add_option("--out", diag.out, "output JSON path (stdout when omitted)");

  PlotCmd plot;
  auto* sp = app.add_subcommand("plot", "two-panel scatterplot (X1 vs Y, g'X vs Y)");
  sp->add_option("--data", plot.data_path, "dataset CSV")->required();
  sp->add_option("--gamma", plot.gamma_spec, "frame JSON, inline numbers, or 'x1'");
  sp->add_option("--out", plot.out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sc) return conj.run();
    if (*ss) return sim.run();
    if (*sf) return fit.run();
    if (*sd) return diag.run();
    if (*sp) return plot.run();
  } catch (const pvcdr::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
