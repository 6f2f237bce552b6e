#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "forensics/model.hpp"
#include "forensics/regression.hpp"

namespace forensics {

// Log-log designs for the headline regressions: YES votes on signatures and
// YES votes on the exit-poll prediction, each with the new-voter share and
// turnout controls. Only polled precincts with strictly positive counts enter;
// exclusions are counted, never silent.
struct LogDesign {
  DesignMatrix signature_design;
  DesignMatrix exitpoll_design;
  Eigen::VectorXd y;  // log yes votes
  std::vector<std::string> precinct_ids;
  long excluded = 0;
};

inline LogDesign build_log_design(const Dataset& d) {
  std::vector<double> y, ls, le, lnew, lturn;
  LogDesign out;
  for (const auto& p : d.precincts) {
    double newvote_share = p.electorate() > 0
                               ? static_cast<double>(p.new_voters) /
                                     static_cast<double>(p.electorate())
                               : 0.0;
    bool usable = p.exit_poll_yes.has_value() && p.yes_votes > 0 &&
                  p.signatures > 0 && *p.exit_poll_yes > 0 && p.new_voters > 0 &&
                  p.turnout > 0.0 && newvote_share > 0.0;
    if (!usable) {
      if (p.exit_poll_yes.has_value()) out.excluded++;
      continue;
    }
    y.push_back(std::log(static_cast<double>(p.yes_votes)));
    ls.push_back(std::log(static_cast<double>(p.signatures)));
    le.push_back(std::log(static_cast<double>(*p.exit_poll_yes)));
    lnew.push_back(std::log(newvote_share));
    lturn.push_back(std::log(p.turnout));
    out.precinct_ids.push_back(p.precinct_id);
  }

  long n = static_cast<long>(y.size());
  if (n < 5)
    throw std::runtime_error("build_log_design: fewer than k+1 usable precincts");

  auto col = [&](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), n).eval();
  };
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  out.signature_design = make_design({"const", "log_signatures", "log_newvote", "log_turnout"},
                                     {ones, col(ls), col(lnew), col(lturn)});
  out.exitpoll_design = make_design({"const", "log_exitpoll", "log_newvote", "log_turnout"},
                                    {ones, col(le), col(lnew), col(lturn)});
  out.y = col(y);
  return out;
}

enum class FraudVerdict { no_fraud_not_rejected, fraud_consistent };

struct FraudTestReport {
  RegressionFit signature_fit;     // OLS, votes on signatures
  RegressionFit exitpoll_fit;      // OLS, votes on exit polls
  RegressionFit iv_signature_fit;  // signatures instrumented by exit polls
  RegressionFit iv_exitpoll_fit;   // exit polls instrumented by signatures
  CovarianceTest ols_cov_test;
  CovarianceTest iv_cov_test;
  FraudVerdict verdict = FraudVerdict::no_fraud_not_rejected;
  double threshold = 2.576;
  long n_precincts = 0;
  long excluded_precincts = 0;
};

// The headline pipeline: two OLS fits, the two just-identified IV fits with
// the proxies instrumenting each other, and the covariance test on each
// residual pair. A positive, significant IV residual covariance is the
// fraud-consistent signal.
inline FraudTestReport run_fraud_test(const Dataset& d, double threshold = 2.576) {
  LogDesign design = build_log_design(d);

  FraudTestReport rep;
  rep.threshold = threshold;
  rep.n_precincts = design.y.size();
  rep.excluded_precincts = design.excluded;

  rep.signature_fit = ols_fit(design.signature_design, design.y);
  rep.exitpoll_fit = ols_fit(design.exitpoll_design, design.y);
  rep.iv_signature_fit = iv_fit(design.signature_design, design.y, design.exitpoll_design);
  rep.iv_exitpoll_fit = iv_fit(design.exitpoll_design, design.y, design.signature_design);

  rep.ols_cov_test = residual_covariance_test(rep.signature_fit.residuals,
                                              rep.exitpoll_fit.residuals);
  rep.iv_cov_test = residual_covariance_test(rep.iv_signature_fit.residuals,
                                             rep.iv_exitpoll_fit.residuals);
  rep.verdict = rep.iv_cov_test.t_statistic > threshold
                    ? FraudVerdict::fraud_consistent
                    : FraudVerdict::no_fraud_not_rejected;
  return rep;
}

}  // namespace forensics
