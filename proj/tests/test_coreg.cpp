#include <doctest.h>

#include <cmath>

#include "bivrec/coreg.hpp"
#include "bivrec/rng.hpp"

using namespace bivrec;

TEST_CASE("coregionalisation apply") {
  SUBCASE("identity") {
    const Eigen::Vector2d v = coreg_apply({1.0, 1.0, 0.0}, {0.7, -1.3});
    CHECK(v[0] == 0.7);
    CHECK(v[1] == -1.3);
  }
  SUBCASE("zero a21 decouples the components") {
    const Eigen::Vector2d v = coreg_apply({2.0, 3.0, 0.0}, {1.0, 1.0});
    CHECK(v[0] == 2.0);
    CHECK(v[1] == 3.0);
  }
  SUBCASE("block-average values from the fitted model") {
    const Eigen::Vector2d v = coreg_apply({2.35, 1.16, 0.85}, {1.0, 1.0});
    CHECK(v[0] == doctest::Approx(2.35).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(2.01).epsilon(1e-12));
  }
}

TEST_CASE("induced correlation") {
  CHECK(induced_correlation(1.7, 0.0, 1.0) == doctest::Approx(0.0));
  CHECK(induced_correlation(1.0, 0.5, 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(induced_correlation(2.35, 0.85, 1.16) ==
        doctest::Approx(0.5910621625154573).epsilon(1e-12));
  // free of a11 and of any common rescaling of (a21, a22)
  CHECK(induced_correlation(0.1, 0.85, 1.16) ==
        doctest::Approx(induced_correlation(7.0, 0.85, 1.16)));
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const double a21 = rng.normal();
    const double a22 = std::abs(rng.normal()) + 0.1;
    const double c = rng.uniform(0.1, 8.0);
    CHECK(induced_correlation(1.0, c * a21, c * a22) ==
          doctest::Approx(induced_correlation(1.0, a21, a22)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(induced_correlation(1.0, 0.0, 0.0), NumericalError);
}

TEST_CASE("spatial versus pure-error shares") {
  CHECK(spatial_share(1.0, 0.0, 1.0).first == doctest::Approx(0.5));
  CHECK(spatial_share(2.35, 0.85, 1.16).first ==
        doctest::Approx(0.846684553468762).epsilon(1e-12));
  CHECK(spatial_share(2.35, 0.85, 1.16).second ==
        doctest::Approx(0.6740653824842736).epsilon(1e-12));
}

TEST_CASE("block average") {
  const std::vector<double> c(12, 3.25);
  CHECK(block_average(c) == doctest::Approx(3.25));
  const std::vector<double> two = {0.0, 1.0};
  CHECK(block_average(two) == doctest::Approx(0.5));
  // linear field over a symmetric grid equals the centroid value
  std::vector<double> lin;
  for (int i = -5; i <= 5; ++i) lin.push_back(2.0 + 0.3 * i);
  CHECK(block_average(lin) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(block_average({}), DataError);
}

TEST_CASE("local covariance A A^T is positive definite") {
  Rng rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    const double a11 = std::abs(rng.normal()) + 1e-3;
    const double a22 = std::abs(rng.normal()) + 1e-3;
    const double a21 = 3.0 * rng.normal();
    Eigen::Matrix2d a;
    a << a11, 0.0, a21, a22;
    const Eigen::Matrix2d t = a * a.transpose();
    CHECK(t(0, 0) > 0.0);
    CHECK(t.determinant() > 0.0);
    CHECK((t - t.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("derived quantities are averaged per cell") {
  // The reporting convention block-averages per-cell derived values.
  CoregField f;
  f.log_a11 = Eigen::VectorXd::Zero(3);
  f.log_a22 = Eigen::VectorXd::Zero(3);
  f.a21.resize(3);
  f.a21 << 0.0, 0.5, 1.0;
  std::vector<double> per_cell;
  for (int i = 0; i < 3; ++i) {
    per_cell.push_back(induced_correlation(f.a11(i), f.a21[i], f.a22(i)));
  }
  const double avg_of_derived = block_average(per_cell);
  const double derived_of_avg = induced_correlation(1.0, 0.5, 1.0);
  CHECK(avg_of_derived != doctest::Approx(derived_of_avg));
  CHECK(avg_of_derived ==
        doctest::Approx((per_cell[0] + per_cell[1] + per_cell[2]) / 3.0));
}
