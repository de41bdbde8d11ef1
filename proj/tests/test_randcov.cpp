#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <pvcdr/linalg.hpp>
#include <pvcdr/randcov.hpp>

using namespace pvcdr;

TEST_CASE("zero rotation leaves the diagonal", "[randcov]") {
  Vector lam(2);
  lam << 5.0, 2.0;
  const SymMatrix s = rotation_sigma(lam, rotation2(0.0));
  REQUIRE(s(0, 0) == Catch::Approx(5.0).margin(1e-12));
  REQUIRE(s(1, 1) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(std::abs(s(0, 1)) < 1e-12);
}

TEST_CASE("quarter turn swaps the axes", "[randcov]") {
  Vector lam(2);
  lam << 5.0, 2.0;
  const SymMatrix s = rotation_sigma(lam, rotation2(3.14159265358979323846 / 2.0));
  REQUIRE(s(0, 0) == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(s(1, 1) == Catch::Approx(5.0).margin(1e-9));
  REQUIRE(std::abs(s(0, 1)) < 1e-9);
}

TEST_CASE("rotation scheme preserves the drawn spectrum", "[randcov]") {
  const CovScheme scheme{CovKind::Rotation, 1000.0, 2};
  RandomStream rs(SeedSpec{31, 0});
  for (int i = 0; i < 500; ++i) {
    const RotationDraw draw = sample_rotation_draw(scheme, rs);
    Vector sorted = draw.lambda;
    std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<double>());
    const EigenDecomp e = eigen_sym(draw.sigma);
    REQUIRE((e.values - sorted).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + sorted(0)));
  }
}

TEST_CASE("rotation scheme p=3 uses a Haar frame", "[randcov]") {
  const CovScheme scheme{CovKind::Rotation, 10.0, 3};
  RandomStream rs(SeedSpec{32, 0});
  const RotationDraw draw = sample_rotation_draw(scheme, rs);
  REQUIRE((draw.axes.transpose() * draw.axes - Matrix::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
  REQUIRE(eigen_sym(draw.sigma).values.minCoeff() > 0.0);
}

TEST_CASE("entry scheme with alpha forced to zero", "[randcov]") {
  const SymMatrix s = entry_sigma(5.0, 2.0, 0.0);
  REQUIRE(s(0, 0) == 5.0);
  REQUIRE(s(1, 1) == 2.0);
  REQUIRE(s(0, 1) == 0.0);
}

TEST_CASE("entry scheme draws stay positive definite with balanced alpha", "[randcov]") {
  const CovScheme scheme{CovKind::Entry, 1000.0, 2};
  RandomStream rs(SeedSpec{33, 0});
  int alpha_pos = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const EntryDraw d = sample_entry_draw(scheme, rs);
    REQUIRE(d.l1 * d.l2 - d.alpha * d.alpha > 0.0);
    REQUIRE(d.l1 > 0.0);
    REQUIRE(d.l1 < scheme.c);
    REQUIRE(d.l2 > 0.0);
    REQUIRE(d.l2 < scheme.c);
    alpha_pos += d.alpha > 0.0;
  }
  // alpha | lambda is symmetric around zero
  REQUIRE(std::abs(static_cast<double>(alpha_pos) / n - 0.5) < 0.02);
}

TEST_CASE("both schemes produce positive definite matrices", "[randcov]") {
  RandomStream rs(SeedSpec{34, 0});
  const CovScheme rot{CovKind::Rotation, 1000.0, 2};
  const CovScheme ent{CovKind::Entry, 1000.0, 2};
  for (int i = 0; i < 10000; ++i) {
    REQUIRE(eigen_sym(sample_sigma(rot, rs)).values.minCoeff() > 0.0);
    REQUIRE(eigen_sym(sample_sigma(ent, rs)).values.minCoeff() > 0.0);
  }
}

TEST_CASE("scheme validation", "[randcov]") {
  CovScheme bad{CovKind::Entry, 1000.0, 3};
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = CovScheme{CovKind::Rotation, -1.0, 2};
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}
