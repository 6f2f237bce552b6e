#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "forensics/regression.hpp"

using namespace forensics;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<long>(xs.size()));
  long i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

DesignMatrix with_intercept(const Eigen::VectorXd& x) {
  return make_design({"const", "x"}, {Eigen::VectorXd::Ones(x.size()), x});
}

}  // namespace

// Hand-derived: x = {1,2,3}, y = {1,2,4} gives slope Sxy/Sxx = 3/2 and
// intercept 7/3 - (3/2)*2 = -2/3.
TEST_CASE("ols reproduces the closed-form two-variable solution") {
  auto X = with_intercept(vec({1, 2, 3}));
  auto fit = ols_fit(X, vec({1, 2, 4}));
  CHECK(fit.coefficients(0) == Catch::Approx(-2.0 / 3.0).epsilon(1e-12));
  CHECK(fit.coefficients(1) == Catch::Approx(1.5).epsilon(1e-12));
  CHECK(fit.estimator == Estimator::ols);
  CHECK(fit.n == 3);
  CHECK(fit.k == 2);
}

TEST_CASE("ols residuals are orthogonal to the design") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  long n = 60;
  Eigen::VectorXd x(n), y(n);
  for (long i = 0; i < n; ++i) {
    x(i) = normal(rng);
    y(i) = 2.0 * x(i) + normal(rng);
  }
  auto X = with_intercept(x);
  auto fit = ols_fit(X, y);
  Eigen::VectorXd g = X.values.transpose() * fit.residuals;
  CHECK(g.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(fit.r_squared > 0.0);
  CHECK(fit.r_squared < 1.0);
}

TEST_CASE("ols is scale-equivariant") {
  auto x = vec({1, 2, 3, 5, 8});
  auto y = vec({2, 3, 5, 9, 12});
  auto fit = ols_fit(with_intercept(x), y);
  auto fit2 = ols_fit(with_intercept(x), (2.0 * y).eval());
  CHECK(fit2.coefficients(1) == Catch::Approx(2.0 * fit.coefficients(1)).epsilon(1e-12));
  auto fit3 = ols_fit(with_intercept((2.0 * x).eval()), y);
  CHECK(fit3.coefficients(1) == Catch::Approx(0.5 * fit.coefficients(1)).epsilon(1e-12));
}

TEST_CASE("perfect fit has unit r-squared and zero residuals") {
  auto x = vec({1, 2, 3, 4});
  auto fit = ols_fit(with_intercept(x), (3.0 * x.array() + 1.0).matrix().eval());
  CHECK(fit.r_squared == Catch::Approx(1.0).margin(1e-12));
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rank-deficient designs name the offending column") {
  auto x = vec({1, 2, 3, 4});
  auto X = make_design({"const", "x", "x_copy"},
                       {Eigen::VectorXd::Ones(4), x, x});
  try {
    ols_fit(X, vec({1, 2, 3, 5}));
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    // one of the two collinear columns must be named
    CHECK((e.offending_column == "x" || e.offending_column == "x_copy"));
  }
}

// Hand-derived just-identified IV: z = {1,2,3}, x = {1,2,4.75}, y = {1,2,4}.
// slope = Szy/Szx = 3/3.75 = 0.8; intercept = 7/3 - 0.8*(7.75/3) = 4/15.
TEST_CASE("iv reproduces the closed-form covariance-ratio solution") {
  auto X = with_intercept(vec({1, 2, 4.75}));
  auto Z = with_intercept(vec({1, 2, 3}));
  auto fit = iv_fit(X, vec({1, 2, 4}), Z);
  CHECK(fit.coefficients(1) == Catch::Approx(0.8).epsilon(1e-12));
  CHECK(fit.coefficients(0) == Catch::Approx(4.0 / 15.0).epsilon(1e-12));
  CHECK(fit.estimator == Estimator::iv2sls);
}

TEST_CASE("iv with the design as its own instrument collapses to ols") {
  auto x = vec({1, 2, 3, 5, 8, 13});
  auto y = vec({2, 3, 5, 9, 12, 20});
  auto X = with_intercept(x);
  auto ols = ols_fit(X, y);
  auto iv = iv_fit(X, y, X);
  CHECK(iv.coefficients(0) == Catch::Approx(ols.coefficients(0)).epsilon(1e-10));
  CHECK(iv.coefficients(1) == Catch::Approx(ols.coefficients(1)).epsilon(1e-10));
}

TEST_CASE("uninformative instruments are rejected") {
  auto X = with_intercept(vec({1, 2, 3, 4}));
  // constant instrument: Z'X is singular
  auto Z = make_design({"const", "z"},
                       {Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(4)});
  CHECK_THROWS_AS(iv_fit(X, vec({1, 2, 3, 5}), Z), WeakInstrumentError);
}

// Hand-derived: r1 = {-1,0,1}, r2 = {-1,1,0} give cov 1/3, corr 0.5,
// se 1/3 and t exactly 1.
TEST_CASE("residual covariance test matches the closed form") {
  auto t = residual_covariance_test(vec({-1, 0, 1}), vec({-1, 1, 0}));
  CHECK(t.covariance == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  REQUIRE(t.correlation.has_value());
  CHECK(*t.correlation == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(t.se_covariance == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(t.t_statistic == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(t.n == 3);
}

TEST_CASE("covariance test is symmetric and its t is scale-invariant") {
  auto r1 = vec({0.3, -1.2, 0.7, 0.2, -0.4});
  auto r2 = vec({0.1, -0.8, 0.9, -0.3, 0.1});
  auto a = residual_covariance_test(r1, r2);
  auto b = residual_covariance_test(r2, r1);
  CHECK(a.covariance == Catch::Approx(b.covariance).epsilon(1e-12));
  CHECK(a.t_statistic == Catch::Approx(b.t_statistic).epsilon(1e-12));

  auto c = residual_covariance_test((10.0 * r1).eval(), r2);
  CHECK(c.covariance == Catch::Approx(10.0 * a.covariance).epsilon(1e-12));
  CHECK(c.t_statistic == Catch::Approx(a.t_statistic).epsilon(1e-12));
  CHECK(*c.correlation == Catch::Approx(*a.correlation).epsilon(1e-12));
}

TEST_CASE("constant residual vectors have no correlation") {
  auto t = residual_covariance_test(vec({1, 1, 1}), vec({-1, 1, 0}));
  CHECK_FALSE(t.correlation.has_value());
  CHECK(t.covariance == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("covariance test rejects degenerate inputs") {
  CHECK_THROWS(residual_covariance_test(vec({1, 2}), vec({1, 2})));
  CHECK_THROWS(residual_covariance_test(vec({1, 2, 3}), vec({1, 2})));
}

TEST_CASE("robust errors track classical errors under homoskedasticity") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  long n = 2000;
  Eigen::VectorXd x(n), y(n);
  for (long i = 0; i < n; ++i) {
    x(i) = normal(rng);
    y(i) = 1.0 + 0.5 * x(i) + normal(rng);
  }
  auto fit = ols_fit(with_intercept(x), y);
  for (long j = 0; j < 2; ++j) {
    CHECK(fit.robust_se(j) ==
          Catch::Approx(fit.classical_se(j)).epsilon(0.15));
  }
}

TEST_CASE("robust errors diverge from classical under heteroskedasticity") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  long n = 4000;
  Eigen::VectorXd x(n), y(n);
  for (long i = 0; i < n; ++i) {
    x(i) = normal(rng);
    y(i) = 0.5 * x(i) + (0.2 + 2.0 * std::abs(x(i))) * normal(rng);
  }
  auto fit = ols_fit(with_intercept(x), y);
  // variance grows with |x|: the sandwich slope error must be larger
  CHECK(fit.robust_se(1) > 1.2 * fit.classical_se(1));
}
