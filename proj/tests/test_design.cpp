#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "bivrec/design.hpp"
#include "bivrec/rng.hpp"

using namespace bivrec;

TEST_CASE("probit basics") {
  CHECK(probit(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(probit_inv(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(probit(1.0 / 64.0) ==
        doctest::Approx(-2.1538746940614564).epsilon(1e-10));
  CHECK(probit(0.2) == doctest::Approx(-0.8416212335729142).epsilon(1e-10));
  CHECK_THROWS_AS(probit(0.0), NumericalError);
  CHECK_THROWS_AS(probit(1.0), NumericalError);
  CHECK_THROWS_AS(probit(-0.2), NumericalError);
}

TEST_CASE("probit and probit_inv are mutually inverse to 1e-12") {
  std::vector<double> ps = {1e-12, 1e-9, 1e-6, 1e-3, 0.02425, 0.1, 0.25, 0.5,
                            0.75,  0.9,  0.97575, 1.0 - 1e-3, 1.0 - 1e-6,
                            1.0 - 1e-9, 1.0 - 1e-12};
  for (double p : ps) {
    const double back = probit_inv(probit(p));
    CHECK(std::abs(back - p) <= 1e-12 * std::max(p, 1e-12));
  }
  // z -> p -> z: tight where p stays well represented; the far upper tail
  // loses resolution in 1-p at double precision.
  for (double z = -8.0; z <= 4.5; z += 0.25) {
    CHECK(probit(probit_inv(z)) == doctest::Approx(z).epsilon(1e-11));
  }
  for (double z = 4.75; z <= 6.0; z += 0.25) {
    CHECK(probit(probit_inv(z)) == doctest::Approx(z).epsilon(1e-7));
  }
}

TEST_CASE("design row fixed order") {
  SUBCASE("trend vanishes at t=2") {
    const DesignRow r = build_design_row(2, 0, 0, 0.0);
    DesignRow want;
    want << 1, 0, 0, 0, 0, 0, 0, 0;
    CHECK((r - want).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("log1p hits 1 at e-1") {
    const DesignRow r = build_design_row(2, 1, 1, std::exp(1.0) - 1.0);
    DesignRow want;
    want << 1, 1, 1, 1, 0, 0, 0, 0;
    CHECK((r - want).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("t=5 interactions") {
    const DesignRow r = build_design_row(5, 1, 0, 0.0);
    const double q = probit(0.2);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == 1.0);
    CHECK(r[2] == 0.0);
    CHECK(r[3] == 0.0);
    CHECK(r[4] == doctest::Approx(q));
    CHECK(r[5] == doctest::Approx(q));
    CHECK(r[6] == 0.0);
    CHECK(r[7] == 0.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_design_row(1, 0, 0, 0.0), DataError);
    CHECK_THROWS_AS(build_design_row(3, 0, 0, -1.0), DataError);
  }
}

TEST_CASE("interaction entries are bit-exact products") {
  Rng rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    const int t = 2 + static_cast<int>(rng.raw() % 60);
    const int lm = static_cast<int>(rng.raw() % 2);
    const int ln = static_cast<int>(rng.raw() % 2);
    const double dist = rng.uniform(0.0, 400.0);
    const DesignRow r = build_design_row(t, lm, ln, dist);
    CHECK(r[5] == r[4] * r[1]);
    CHECK(r[6] == r[4] * r[2]);
    CHECK(r[7] == r[4] * r[3]);
  }
}

TEST_CASE("linear predictor") {
  SUBCASE("zeros") {
    const Eigen::Vector2d eta = linear_predictor(
        CoefMatrix::Zero(), build_design_row(3, 0, 0, 10.0), {0.0, 0.0});
    CHECK(eta[0] == 0.0);
    CHECK(eta[1] == 0.0);
  }
  SUBCASE("posterior-mean anchor") {
    // Intercept -0.62 plus trend coefficient 0.92 at t = 64.
    CoefMatrix coef = CoefMatrix::Zero();
    coef(0, 0) = -0.62;
    coef(0, 4) = 0.92;
    const Eigen::Vector2d eta =
        linear_predictor(coef, build_design_row(64, 0, 0, 0.0), {0.0, 0.0});
    CHECK(eta[0] == doctest::Approx(-2.60156471853654).epsilon(1e-10));
  }
  SUBCASE("random-effect shift is componentwise") {
    CoefMatrix coef = CoefMatrix::Random();
    const DesignRow row = build_design_row(7, 1, 0, 25.0);
    const Eigen::Vector2d base = linear_predictor(coef, row, {0.0, 0.0});
    const Eigen::Vector2d shifted = linear_predictor(coef, row, {1.0, -1.0});
    CHECK(shifted[0] == doctest::Approx(base[0] + 1.0));
    CHECK(shifted[1] == doctest::Approx(base[1] - 1.0));
  }
}

TEST_CASE("stationary special case gives 1/t") {
  CoefMatrix coef = CoefMatrix::Zero();
  coef(0, 4) = 1.0;
  coef(1, 4) = 1.0;
  for (int t = 2; t <= 64; ++t) {
    for (int lm : {0, 1}) {
      for (int ln : {0, 1}) {
        const Eigen::Vector2d eta = linear_predictor(
            coef, build_design_row(t, lm, ln, 123.0), {0.0, 0.0});
        CHECK(std::abs(probit_inv(eta[0]) - 1.0 / t) <= 1e-12);
        CHECK(std::abs(probit_inv(eta[1]) - 1.0 / t) <= 1e-12);
      }
    }
  }
}

namespace {

Eigen::MatrixXd random_design(int n, Rng& rng) {
  Eigen::MatrixXd rows(n, kBivariateDesignDim);
  for (int i = 0; i < n; ++i) {
    const int t = 2 + static_cast<int>(rng.raw() % 40);
    rows.row(i) = build_design_row(t, static_cast<int>(rng.raw() % 2),
                                   static_cast<int>(rng.raw() % 2),
                                   rng.uniform(0.0, 300.0))
                      .transpose();
  }
  return rows;
}

}  // namespace

TEST_CASE("standardizer round trip preserves eta") {
  Rng rng(31);
  const Eigen::MatrixXd raw = random_design(400, rng);
  std::vector<bool> ind(kBivariateDesignDim, false);
  ind[1] = ind[2] = ind[5] = ind[6] = true;
  const Standardizer st = Standardizer::fit(raw, ind);
  const Eigen::MatrixXd std_rows = st.apply(raw);

  Eigen::MatrixXd beta_std(2, kBivariateDesignDim);
  for (int s = 0; s < 2; ++s) {
    for (int j = 0; j < kBivariateDesignDim; ++j) {
      beta_std(s, j) = rng.normal();
    }
  }
  const Eigen::MatrixXd beta_raw = st.back_transform(beta_std);
  const Eigen::MatrixXd eta_std = std_rows * beta_std.transpose();
  const Eigen::MatrixXd eta_raw = raw * beta_raw.transpose();
  CHECK((eta_std - eta_raw).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("standardizer edge cases") {
  SUBCASE("identity leaves coefficients alone") {
    const Standardizer id = Standardizer::identity(4);
    Eigen::MatrixXd beta(1, 4);
    beta << 1.5, -2.0, 0.25, 3.0;
    CHECK((id.back_transform(beta) - beta).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("zero-variance covariate errors") {
    Eigen::MatrixXd rows(5, 3);
    rows.col(0).setOnes();
    rows.col(1).setConstant(7.0);
    rows.col(2).setRandom();
    CHECK_THROWS_AS(Standardizer::fit(rows, {false, false, false}), DataError);
    // ...unless flagged as an indicator column, which stays untouched.
    const Standardizer st = Standardizer::fit(rows, {false, true, false});
    CHECK(st.scale()[1] == 1.0);
    CHECK(st.mean()[1] == 0.0);
  }
}
