#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <pvcdr/diagnostics.hpp>
#include <pvcdr/models.hpp>

using namespace pvcdr;

namespace {

Model3Params example21_params() {
  return Model3Params{StiefelFrame::axis(3, 0), VarianceProfile::abs_dev(0.0, 1.0), 1.0};
}

Model5Params example22_params() {
  return Model5Params{Vector::Zero(3),
                      StiefelFrame::axis(3, 0),
                      MeanProfile::linear(Vector::Constant(1, 5.0), Vector::Zero(1)),
                      StiefelFrame::axis(3, 0),
                      VarianceProfile::abs_dev(0.0, 1.0),
                      1.0};
}

}  // namespace

TEST_CASE("StiefelFrame validates orthonormality", "[models]") {
  Matrix ok(3, 1);
  ok << 1.0, 0.0, 0.0;
  REQUIRE_NOTHROW(StiefelFrame(ok));
  Matrix bad(3, 1);
  bad << 1.0, 1.0, 0.0;
  REQUIRE_THROWS_AS(StiefelFrame(bad), std::invalid_argument);
  REQUIRE_THROWS_AS(StiefelFrame(Matrix::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("variance profile families", "[models]") {
  const VarianceProfile abs = VarianceProfile::abs_dev(2.0, 3.0);
  REQUIRE(abs.at(5.0)(0, 0) == Catch::Approx(9.0));
  REQUIRE(abs.at(-1.0)(0, 0) == Catch::Approx(9.0));

  Vector centers(2), scales(2);
  centers << 0.0, 1.0;
  scales << 1.0, 2.0;
  const VarianceProfile diag = VarianceProfile::diag_abs_dev(centers, scales);
  const Matrix m = diag.at(2.0);
  REQUIRE(m(0, 0) == Catch::Approx(2.0));
  REQUIRE(m(1, 1) == Catch::Approx(2.0));
  REQUIRE(m(0, 1) == 0.0);

  std::map<double, Matrix> table;
  table[1.0] = Matrix::Identity(2, 2);
  const VarianceProfile lut = VarianceProfile::lookup(table);
  REQUIRE(lut.at(1.0) == Matrix::Identity(2, 2));
  REQUIRE_THROWS_AS(lut.at(2.0), std::invalid_argument);
}

TEST_CASE("multiplier matrix of the worked dispersion model", "[models]") {
  // gamma = e1, nu_y = |y|, sigma2 = 1 at y = 1: diag(2, 1, 1)
  const Model3Params params = example21_params();
  const Matrix m = multiplier_matrix(params, 1.0);
  Matrix expect = Matrix::Identity(3, 3);
  expect(0, 0) = 2.0;
  REQUIRE((m - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("multiplier with vanishing profile is sigma2 I", "[models]") {
  Model3Params params{StiefelFrame::axis(3, 0), VarianceProfile::abs_dev(0.0, 0.0), 2.5};
  const Matrix m = multiplier_matrix(params, 7.0);
  REQUIRE((m - 2.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("multiplier squared identity", "[models]") {
  // M_y^2 == Gamma ((nu+I)^2 - I) Gamma' + I for sigma2 = 1, by dense
  // multiplication
  RandomStream rs(SeedSpec{41, 0});
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix frame = haar_orthogonal(4, rs).leftCols(2);
    std::map<double, Matrix> table;
    Matrix nu(2, 2);
    const double a = rs.uniform(-0.5, 2.0), b = rs.uniform(-0.5, 0.5),
                 c = rs.uniform(-0.5, 2.0);
    nu << a, b, b, c;
    table[1.5] = nu;
    Model3Params params{StiefelFrame(frame), VarianceProfile::lookup(table), 1.0};
    Eigen::SelfAdjointEigenSolver<Matrix> es(nu);
    if (es.eigenvalues().minCoeff() <= -1.0 + 1e-6) continue;
    const Matrix m = multiplier_matrix(params, 1.5);
    const Matrix lhs = m * m;
    const Matrix nu_plus = nu + Matrix::Identity(2, 2);
    const Matrix rhs = frame * (nu_plus * nu_plus - Matrix::Identity(2, 2)) *
                           frame.transpose() +
                       Matrix::Identity(4, 4);
    REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("inadmissible profile is rejected", "[models]") {
  Model3Params params{StiefelFrame::axis(3, 0), VarianceProfile::abs_dev(0.0, -2.0), 1.0};
  REQUIRE_THROWS_WITH(multiplier_matrix(params, 1.0), "profile not admissible at y");
  Vector ys = Vector::Constant(5, 1.0);
  REQUIRE_THROWS_WITH(sample_model3(params, ys, SeedSpec{1, 0}),
                      "profile not admissible at y");
}

TEST_CASE("model3 sampler with vanishing profile ignores y", "[models]") {
  Model3Params params{StiefelFrame::axis(3, 0), VarianceProfile::abs_dev(0.0, 0.0), 1.0};
  Vector ys1 = Vector::LinSpaced(10, -3.0, 3.0);
  Vector ys2 = Vector::Constant(10, 42.0);
  const Dataset d1 = sample_model3(params, ys1, SeedSpec{7, 7});
  const Dataset d2 = sample_model3(params, ys2, SeedSpec{7, 7});
  REQUIRE(d1.x == d2.x);  // x = eps regardless of y
}

TEST_CASE("model3 sampler is deterministic", "[models]") {
  const Model3Params params = example21_params();
  RandomStream ys_rs(SeedSpec{50, 0});
  const Vector ys = sample_normal_ys(100, 2.0, 1.0, ys_rs);
  const Dataset a = sample_model3(params, ys, SeedSpec{50, 1});
  const Dataset b = sample_model3(params, ys, SeedSpec{50, 1});
  REQUIRE(a.x == b.x);
  REQUIRE(a.y == b.y);
}

TEST_CASE("model3 conditional variance matches the multiplier square", "[models]") {
  // var(x1 | y) = (1 + |y|)^2, so near |y| = 1 the first coordinate has
  // variance about 4 and the others about 1
  const Model3Params params = example21_params();
  RandomStream ys_rs(SeedSpec{51, 0});
  const Vector ys = sample_normal_ys(100000, 2.0, 1.0, ys_rs);
  const Dataset data = sample_model3(params, ys, SeedSpec{51, 1});
  double s1 = 0, s2 = 0, sq1 = 0, sq2 = 0;
  int count = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double ay = std::abs(data.y(i));
    if (ay < 0.9 || ay > 1.1) continue;
    ++count;
    s1 += data.x(i, 0);
    sq1 += data.x(i, 0) * data.x(i, 0);
    s2 += data.x(i, 1);
    sq2 += data.x(i, 1) * data.x(i, 1);
  }
  REQUIRE(count > 1000);
  const double var1 = sq1 / count - (s1 / count) * (s1 / count);
  const double var2 = sq2 / count - (s2 / count) * (s2 / count);
  REQUIRE(var1 == Catch::Approx(4.0).margin(0.5));
  REQUIRE(var2 == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("model5 with no profile reduces to a shifted Gaussian", "[models]") {
  Vector mu(3);
  mu << 1.0, -2.0, 0.5;
  Model5Params params{mu,
                      StiefelFrame::axis(3, 0),
                      MeanProfile::linear(Vector::Zero(1), Vector::Zero(1)),
                      StiefelFrame::axis(3, 1),
                      VarianceProfile::abs_dev(0.0, 0.0),
                      1.0};
  Vector ys = Vector::Constant(6, 3.0);
  const Dataset data = sample_model5(params, ys, SeedSpec{52, 0});
  // same eps stream as a raw replication: x_i = mu + eps_i
  RandomStream rs(SeedSpec{52, 0});
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    Vector eps(3);
    for (int k = 0; k < 3; ++k) eps(k) = rs.normal();
    REQUIRE((data.x.row(i).transpose() - (mu + eps)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("model5 mean term shows the 5y slope", "[models]") {
  const Model5Params params = example22_params();
  RandomStream ys_rs(SeedSpec{53, 0});
  const Vector ys = sample_normal_ys(100000, 3.0, 1.0, ys_rs);
  const Dataset data = sample_model5(params, ys, SeedSpec{53, 1});
  // least squares slope of x1 on y
  const double ybar = data.y.mean();
  const double xbar = data.x.col(0).mean();
  const double cov = ((data.y.array() - ybar) * (data.x.col(0).array() - xbar)).mean();
  const double var = (data.y.array() - ybar).square().mean();
  REQUIRE(cov / var == Catch::Approx(5.0).margin(0.05));
}

TEST_CASE("model5 shared-frame detection and validation", "[models]") {
  const Model5Params shared = example22_params();
  REQUIRE(shared.shared_frame());
  REQUIRE_NOTHROW(shared.validate());

  // distinct frames with d1 + d2 >= p are rejected
  Model5Params bad{Vector::Zero(2),
                   StiefelFrame::axis(2, 0),
                   MeanProfile::linear(Vector::Zero(1), Vector::Zero(1)),
                   StiefelFrame::axis(2, 1),
                   VarianceProfile::abs_dev(0.0, 1.0),
                   1.0};
  REQUIRE_FALSE(bad.shared_frame());
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("complement projections are uncorrelated with y", "[models]") {
  // Gamma0'X = sigma^2 Gamma0'eps is independent of Y under model 3
  const Model3Params params = example21_params();
  RandomStream ys_rs(SeedSpec{54, 0});
  const Vector ys = sample_normal_ys(10000, 2.0, 1.0, ys_rs);
  const Dataset data = sample_model3(params, ys, SeedSpec{54, 1});
  const StiefelFrame g0 = complement_basis(params.gamma);
  const Matrix proj = data.x * g0.cols();
  const double bound = 4.0 / std::sqrt(10000.0);
  for (int k = 0; k < 2; ++k) {
    REQUIRE(std::abs(pearson_correlation(proj.col(k), data.y)) <= bound);
    const Vector ay = data.y.cwiseAbs();
    REQUIRE(std::abs(pearson_correlation(proj.col(k), ay)) <= bound);
    const Vector y2 = data.y.array().square();
    REQUIRE(std::abs(pearson_correlation(proj.col(k), y2)) <= bound);
  }
}

TEST_CASE("dataset validation", "[models]") {
  Dataset d;
  d.x = Matrix::Zero(0, 3);
  d.y = Vector::Zero(0);
  REQUIRE_THROWS_AS(d.validate(), std::invalid_argument);
  d.x = Matrix::Zero(2, 3);
  d.y = Vector::Zero(2);
  REQUIRE_NOTHROW(d.validate());
  d.x(1, 1) = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(d.validate(), std::invalid_argument);
}
