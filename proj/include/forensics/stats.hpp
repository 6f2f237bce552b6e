#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace forensics::stats {

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

inline double log_binomial_pmf(std::int64_t x, std::int64_t n, double p) {
  if (p <= 0.0) return x == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return x == n ? 0.0 : -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0) +
         x * std::log(p) + (n - x) * std::log1p(-p);
}

// Two-sided exact binomial test: sum the probabilities of all outcomes no more
// likely than the observed one.
inline double exact_binomial_p(std::int64_t x, std::int64_t n, double p) {
  if (n <= 0) return 1.0;
  double lobs = log_binomial_pmf(x, n, p);
  double total = 0.0;
  for (std::int64_t i = 0; i <= n; ++i) {
    double l = log_binomial_pmf(i, n, p);
    if (l <= lobs + 1e-12) total += std::exp(l);
  }
  return std::min(total, 1.0);
}

// Kolmogorov-Smirnov statistic of a sample against the standard normal.
inline double ks_statistic_normal(std::vector<double> z) {
  if (z.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(z.begin(), z.end());
  double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double f = normal_cdf(z[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Asymptotic Kolmogorov distribution: P(sqrt(n) D > lambda).
inline double ks_p_value(double d, std::size_t n) {
  double lambda = d * std::sqrt(static_cast<double>(n));
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    double term = 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
  double m = mean(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Nearest-rank empirical quantile on already-sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  double idx = std::ceil(q * static_cast<double>(sorted.size())) - 1.0;
  auto i = static_cast<std::size_t>(std::clamp(idx, 0.0, sorted.size() - 1.0));
  return sorted[i];
}

}  // namespace forensics::stats
