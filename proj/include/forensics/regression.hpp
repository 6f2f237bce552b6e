#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace forensics {

struct DesignMatrix {
  std::vector<std::string> names;  // one per column, unique
  Eigen::MatrixXd values;          // n x k

  long n() const { return values.rows(); }
  long k() const { return values.cols(); }
};

inline DesignMatrix make_design(std::vector<std::string> names,
                                const std::vector<Eigen::VectorXd>& columns) {
  if (names.size() != columns.size())
    throw std::invalid_argument("design: names/columns mismatch");
  DesignMatrix d;
  d.names = std::move(names);
  d.values.resize(columns.empty() ? 0 : columns.front().size(),
                  static_cast<long>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) d.values.col(j) = columns[j];
  if (!d.values.allFinite())
    throw std::invalid_argument("design: non-finite entries");
  return d;
}

enum class Estimator { ols, iv2sls };

struct RegressionFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  Eigen::VectorXd classical_se;
  Eigen::VectorXd robust_se;
  double r_squared = 0.0;
  long n = 0;
  long k = 0;
  Estimator estimator = Estimator::ols;
  std::vector<std::string> names;
};

struct RankDeficientError : std::runtime_error {
  explicit RankDeficientError(const std::string& column)
      : std::runtime_error("rank-deficient design, offending column: " + column),
        offending_column(column) {}
  std::string offending_column;
};

struct WeakInstrumentError : std::runtime_error {
  explicit WeakInstrumentError(double condition)
      : std::runtime_error("near-singular Z'X (weak instrument), condition " +
                           std::to_string(condition)),
        condition(condition) {}
  double condition;
};

namespace detail {

constexpr double kRankTol = 1e-10;  // relative tolerance on R diagonals

inline bool has_intercept(const DesignMatrix& X) {
  for (long j = 0; j < X.k(); ++j) {
    if ((X.values.col(j).array() == 1.0).all()) return true;
  }
  return false;
}

inline double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& resid,
                        bool intercept) {
  double rss = resid.squaredNorm();
  double tss;
  if (intercept) {
    tss = (y.array() - y.mean()).matrix().squaredNorm();
  } else {
    tss = y.squaredNorm();
  }
  if (tss <= 0.0) return rss <= 1e-24 ? 1.0 : 0.0;
  return 1.0 - rss / tss;
}

// HC1 sandwich given the bread matrix B = (A'A)^-1 and the regressor matrix
// used in the moment condition.
inline Eigen::VectorXd hc1(const Eigen::MatrixXd& A, const Eigen::MatrixXd& bread,
                           const Eigen::VectorXd& resid) {
  long n = A.rows(), k = A.cols();
  Eigen::MatrixXd meat = A.transpose() *
                         resid.array().square().matrix().asDiagonal() * A;
  Eigen::MatrixXd v = bread * meat * bread;
  double scale = static_cast<double>(n) / static_cast<double>(n - k);
  return (scale * v.diagonal().array()).cwiseMax(0.0).sqrt();
}

}  // namespace detail

// Ordinary least squares through a Householder QR of X. Classical standard
// errors from sigma^2 (X'X)^-1 with sigma^2 = RSS/(n-k); robust errors are
// HC1.
inline RegressionFit ols_fit(const DesignMatrix& X, const Eigen::VectorXd& y) {
  long n = X.n(), k = X.k();
  if (y.size() != n) throw std::invalid_argument("ols_fit: length(y) != n");
  if (n <= k) throw std::invalid_argument("ols_fit: n <= k");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X.values);
  qr.setThreshold(detail::kRankTol);
  if (qr.rank() < k) {
    // First column folded into the span of the others, in pivot order.
    long bad = qr.colsPermutation().indices()(qr.rank());
    throw RankDeficientError(X.names[bad]);
  }

  RegressionFit fit;
  fit.estimator = Estimator::ols;
  fit.names = X.names;
  fit.n = n;
  fit.k = k;
  fit.coefficients = qr.solve(y);
  fit.residuals = y - X.values * fit.coefficients;

  double sigma2 = fit.residuals.squaredNorm() / static_cast<double>(n - k);
  Eigen::MatrixXd xtx_inv =
      (X.values.transpose() * X.values)
          .ldlt()
          .solve(Eigen::MatrixXd::Identity(k, k));
  fit.classical_se = (sigma2 * xtx_inv.diagonal().array()).cwiseMax(0.0).sqrt();
  fit.robust_se = detail::hc1(X.values, xtx_inv, fit.residuals);
  fit.r_squared = detail::r_squared(y, fit.residuals, detail::has_intercept(X));
  return fit;
}

// Just-identified 2SLS: coefficients solve (Z'X) b = Z'y. Residuals are taken
// against X itself; classical errors use the first-stage projection of X on Z.
inline RegressionFit iv_fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                            const DesignMatrix& Z) {
  long n = X.n(), k = X.k();
  if (Z.n() != n || Z.k() != k)
    throw std::invalid_argument("iv_fit: Z must match X dimensions");
  if (y.size() != n) throw std::invalid_argument("iv_fit: length(y) != n");
  if (n <= k) throw std::invalid_argument("iv_fit: n <= k");

  Eigen::MatrixXd ztx = Z.values.transpose() * X.values;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ztx, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(k - 1);
  if (!(smin > detail::kRankTol * smax))
    throw WeakInstrumentError(smin > 0.0 ? smax / smin :
                              std::numeric_limits<double>::infinity());

  RegressionFit fit;
  fit.estimator = Estimator::iv2sls;
  fit.names = X.names;
  fit.n = n;
  fit.k = k;
  fit.coefficients = svd.solve(Z.values.transpose() * y);
  fit.residuals = y - X.values * fit.coefficients;

  // First-stage projection X_hat = Z (Z'Z)^-1 Z'X.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> zqr(Z.values);
  zqr.setThreshold(detail::kRankTol);
  if (zqr.rank() < k) {
    long bad = zqr.colsPermutation().indices()(zqr.rank());
    throw RankDeficientError(Z.names[bad]);
  }
  Eigen::MatrixXd xhat = Z.values * zqr.solve(X.values);
  double sigma2 = fit.residuals.squaredNorm() / static_cast<double>(n - k);
  Eigen::MatrixXd bread =
      (xhat.transpose() * xhat).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  fit.classical_se = (sigma2 * bread.diagonal().array()).cwiseMax(0.0).sqrt();
  fit.robust_se = detail::hc1(xhat, bread, fit.residuals);
  fit.r_squared = detail::r_squared(y, fit.residuals, detail::has_intercept(X));
  return fit;
}

// HC1 heteroskedasticity-robust standard errors for an OLS fit on X.
inline Eigen::VectorXd robust_se(const DesignMatrix& X, const RegressionFit& fit) {
  long k = X.k();
  Eigen::MatrixXd xtx = X.values.transpose() * X.values;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (!lu.isInvertible()) throw RankDeficientError(X.names.empty() ? "?" : X.names[0]);
  Eigen::MatrixXd bread = lu.solve(Eigen::MatrixXd::Identity(k, k));
  return detail::hc1(X.values, bread, fit.residuals);
}

struct CovarianceTest {
  double covariance = 0.0;
  std::optional<double> correlation;  // absent when either vector is constant
  double se_covariance = 0.0;
  double t_statistic = 0.0;
  long n = 0;
};

// Plug-in covariance of two residual vectors (denominator n), with the
// delta-method standard error sd(products)/sqrt(n).
inline CovarianceTest residual_covariance_test(const Eigen::VectorXd& r1,
                                               const Eigen::VectorXd& r2) {
  long n = r1.size();
  if (r2.size() != n) throw std::invalid_argument("covariance test: length mismatch");
  if (n < 3) throw std::invalid_argument("covariance test: n < 3");

  Eigen::ArrayXd a = r1.array() - r1.mean();
  Eigen::ArrayXd b = r2.array() - r2.mean();
  Eigen::ArrayXd w = a * b;

  CovarianceTest t;
  t.n = n;
  t.covariance = w.sum() / static_cast<double>(n);
  double wvar = (w - w.mean()).square().sum() / static_cast<double>(n - 1);
  t.se_covariance = std::sqrt(wvar / static_cast<double>(n));
  t.t_statistic = t.se_covariance > 0.0 ? t.covariance / t.se_covariance : 0.0;

  double v1 = a.square().sum() / static_cast<double>(n);
  double v2 = b.square().sum() / static_cast<double>(n);
  if (v1 > 0.0 && v2 > 0.0)
    t.correlation = t.covariance / std::sqrt(v1 * v2);
  return t;
}

}  // namespace forensics
