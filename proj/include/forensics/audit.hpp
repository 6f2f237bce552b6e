#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "forensics/model.hpp"
#include "forensics/regression.hpp"
#include "forensics/rng.hpp"
#include "forensics/stats.hpp"

namespace forensics {

struct AuditFit {
  RegressionFit fit;
  double interaction_coefficient = 0.0;  // dum * log signatures
  double interaction_t = 0.0;            // robust t on that coefficient
  long n_precincts = 0;
  long excluded_precincts = 0;
};

namespace detail {

struct AuditRows {
  std::vector<double> y, ls, lreg, lnew, lnon;
  std::vector<bool> audited;
  long excluded = 0;
};

inline AuditRows collect_audit_rows(const Dataset& d,
                                    const std::vector<bool>* audited_override) {
  AuditRows rows;
  std::size_t i = 0;
  for (const auto& p : d.precincts) {
    bool aud = audited_override ? (*audited_override)[i] : p.audited;
    ++i;
    if (p.yes_votes <= 0 || p.signatures <= 0 || p.registered_at_reafirmazo <= 0 ||
        p.new_voters <= 0 || p.non_voters <= 0) {
      rows.excluded++;
      continue;
    }
    rows.y.push_back(std::log(static_cast<double>(p.yes_votes)));
    rows.ls.push_back(std::log(static_cast<double>(p.signatures)));
    rows.lreg.push_back(std::log(static_cast<double>(p.registered_at_reafirmazo)));
    rows.lnew.push_back(std::log(static_cast<double>(p.new_voters)));
    rows.lnon.push_back(std::log(static_cast<double>(p.non_voters)));
    rows.audited.push_back(aud);
  }
  return rows;
}

inline AuditFit audit_regression_from_rows(const AuditRows& rows) {
  long n = static_cast<long>(rows.y.size());
  bool any_aud = false, any_unaud = false;
  for (bool a : rows.audited) (a ? any_aud : any_unaud) = true;
  if (!any_aud || !any_unaud)
    throw std::runtime_error("interaction_regression: no variation in dummy");

  auto col = [&](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), n).eval();
  };
  Eigen::VectorXd dum(n);
  for (long i = 0; i < n; ++i) dum(i) = rows.audited[i] ? 1.0 : 0.0;
  Eigen::VectorXd ls = col(rows.ls), lreg = col(rows.lreg), lnew = col(rows.lnew),
                  lnon = col(rows.lnon);

  DesignMatrix X = make_design(
      {"const", "log_signatures", "dum_x_log_signatures", "log_registered",
       "dum_x_log_registered", "log_new_voters", "dum_x_log_new_voters",
       "log_non_voters", "dum_x_log_non_voters", "dum"},
      {Eigen::VectorXd::Ones(n), ls, (dum.array() * ls.array()).matrix(), lreg,
       (dum.array() * lreg.array()).matrix(), lnew,
       (dum.array() * lnew.array()).matrix(), lnon,
       (dum.array() * lnon.array()).matrix(), dum});

  AuditFit out;
  out.fit = ols_fit(X, col(rows.y));
  out.n_precincts = n;
  out.excluded_precincts = rows.excluded;
  out.interaction_coefficient = out.fit.coefficients(2);
  out.interaction_t = out.fit.robust_se(2) > 0.0
                          ? out.fit.coefficients(2) / out.fit.robust_se(2)
                          : 0.0;
  return out;
}

}  // namespace detail

// Table-10-style interaction regression over the full precinct universe:
// log YES on the four log controls, each interacted with the audited dummy.
// The statistic of interest is the robust t on dum * log signatures.
inline AuditFit interaction_regression(const Dataset& d) {
  return detail::audit_regression_from_rows(detail::collect_audit_rows(d, nullptr));
}

struct BootstrapDistribution {
  std::vector<double> t_values;
  long replicates = 0;
  long sample_size = 0;
  std::map<int, double> percentiles;  // {1,5,10,25,50,75,90,95,99}
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  std::uint64_t seed = 0;

  double upper_quantile(double level) const {
    std::vector<double> sorted = t_values;
    std::sort(sorted.begin(), sorted.end());
    return stats::quantile_sorted(sorted, 1.0 - level);
  }
};

// Null distribution of the interaction t: repeatedly relabel a random
// sample of un-audited precincts as pseudo-audited and rerun the interaction
// regression on the un-audited universe only. Replicate r draws from
// sub_rng(seed, r), so results do not depend on execution order.
inline BootstrapDistribution bootstrap_t_distribution(const Dataset& d,
                                                      long replicates,
                                                      long sample_size,
                                                      std::uint64_t seed) {
  Dataset universe;
  universe.provenance = d.provenance;
  for (const auto& p : d.precincts)
    if (!p.audited) universe.precincts.push_back(p);
  long n_unaudited = static_cast<long>(universe.precincts.size());
  if (sample_size >= n_unaudited)
    throw std::runtime_error("bootstrap: sample_size >= un-audited precinct count");
  if (replicates < 1) throw std::runtime_error("bootstrap: replicates < 1");

  detail::AuditRows base = detail::collect_audit_rows(universe, nullptr);
  long n_rows = static_cast<long>(base.y.size());

  // Sampling happens over all un-audited precincts; rows excluded from the
  // regression for log-domain reasons are still eligible draw targets, same
  // as a physical box draw would be.
  std::vector<long> row_of_precinct(universe.precincts.size(), -1);
  {
    long r = 0;
    for (std::size_t i = 0; i < universe.precincts.size(); ++i) {
      const auto& p = universe.precincts[i];
      bool usable = p.yes_votes > 0 && p.signatures > 0 &&
                    p.registered_at_reafirmazo > 0 && p.new_voters > 0 &&
                    p.non_voters > 0;
      if (usable) row_of_precinct[i] = r++;
    }
  }

  BootstrapDistribution out;
  out.replicates = replicates;
  out.sample_size = sample_size;
  out.seed = seed;
  out.t_values.resize(replicates);

  for (long rep = 0; rep < replicates; ++rep) {
    auto rng = sub_rng(seed, static_cast<std::uint64_t>(rep));
    // Partial Fisher-Yates draw of sample_size indices without replacement.
    std::vector<long> idx(universe.precincts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<long>(i);
    for (long i = 0; i < sample_size; ++i) {
      std::uniform_int_distribution<long> pick(i, static_cast<long>(idx.size()) - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<bool> pseudo(n_rows, false);
    for (long i = 0; i < sample_size; ++i) {
      long row = row_of_precinct[idx[i]];
      if (row >= 0) pseudo[row] = true;
    }
    detail::AuditRows rows = base;
    rows.audited.assign(pseudo.begin(), pseudo.end());
    out.t_values[rep] = detail::audit_regression_from_rows(rows).interaction_t;
  }

  std::vector<double> sorted = out.t_values;
  std::sort(sorted.begin(), sorted.end());
  out.mean = stats::mean(out.t_values);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double t : out.t_values) {
    double c = t - out.mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  double n = static_cast<double>(replicates);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out.sd = replicates > 1 ? std::sqrt(m2 * n / (n - 1.0)) : 0.0;
  out.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  out.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
  for (int q : {1, 5, 10, 25, 50, 75, 90, 95, 99})
    out.percentiles[q] = stats::quantile_sorted(sorted, q / 100.0);
  return out;
}

enum class RandomnessVerdict { consistent_with_random, not_random };

// One-sided upper test: the fraud mechanism under scrutiny predicts an
// inflated signature elasticity in the audited (clean) precincts.
inline RandomnessVerdict randomness_verdict(const AuditFit& fit,
                                            const BootstrapDistribution& dist,
                                            double level = 0.01) {
  if (dist.replicates < 100)
    throw std::runtime_error("randomness_verdict: need >= 100 replicates");
  return fit.interaction_t > dist.upper_quantile(level)
             ? RandomnessVerdict::not_random
             : RandomnessVerdict::consistent_with_random;
}

struct NaiveReport {
  double mean_audited_yes_share = 0.0;
  double mean_unaudited_yes_share = 0.0;
  double corr_sig_votes_audited = 0.0;
  double corr_sig_votes_unaudited = 0.0;
  // These checks compare unconditional moments only; equal means and equal
  // correlations between the subsets do not imply equal conditional
  // relationships, which is what the interaction regression measures.
};

inline NaiveReport naive_checks(const Dataset& d) {
  std::vector<double> share_a, share_u;
  std::vector<double> sig_a, sig_u, vote_a, vote_u;
  for (const auto& p : d.precincts) {
    double votes = static_cast<double>(p.voters_showed_up());
    if (votes <= 0.0) continue;
    double share = static_cast<double>(p.yes_votes) / votes;
    if (p.audited) {
      share_a.push_back(share);
      sig_a.push_back(static_cast<double>(p.signatures));
      vote_a.push_back(static_cast<double>(p.yes_votes));
    } else {
      share_u.push_back(share);
      sig_u.push_back(static_cast<double>(p.signatures));
      vote_u.push_back(static_cast<double>(p.yes_votes));
    }
  }
  if (share_a.empty() || share_u.empty())
    throw std::runtime_error("naive_checks: empty audited or un-audited subset");

  auto corr = [](const std::vector<double>& x, const std::vector<double>& y) {
    double mx = stats::mean(x), my = stats::mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  };

  NaiveReport rep;
  rep.mean_audited_yes_share = stats::mean(share_a);
  rep.mean_unaudited_yes_share = stats::mean(share_u);
  rep.corr_sig_votes_audited = corr(sig_a, vote_a);
  rep.corr_sig_votes_unaudited = corr(sig_u, vote_u);
  return rep;
}

}  // namespace forensics
