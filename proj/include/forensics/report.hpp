#pragma once

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>

#include "forensics/audit.hpp"
#include "forensics/diagnostics.hpp"
#include "forensics/fraudtest.hpp"
#include "forensics/ingest.hpp"
#include "forensics/model.hpp"
#include "forensics/regression.hpp"

namespace forensics {

using nlohmann::json;

inline constexpr const char* kToolVersion = "referendum-forensics 1.0.0";
inline constexpr const char* kSchemaVersion = "1";

// FNV-1a content hash of an input file, hex-encoded; enough to tell whether
// a rerun saw the same bytes.
inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "unreadable";
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json to_json(const Violation& v) {
  return {{"record", v.record}, {"rule", v.rule}, {"detail", v.detail}};
}

inline json to_json(const ValidationReport& r) {
  json j;
  j["violations"] = json::array();
  for (const auto& v : r.violations) j["violations"].push_back(to_json(v));
  j["notes"] = json::array();
  for (const auto& v : r.notes) j["notes"].push_back(to_json(v));
  return j;
}

inline json to_json(const RegressionFit& f) {
  json j;
  j["estimator"] = f.estimator == Estimator::ols ? "ols" : "iv2sls";
  j["n"] = f.n;
  j["k"] = f.k;
  j["r_squared"] = f.r_squared;
  json coef = json::object();
  for (long i = 0; i < f.k; ++i) {
    coef[f.names[i]] = {{"coefficient", f.coefficients(i)},
                        {"classical_se", f.classical_se(i)},
                        {"robust_se", f.robust_se(i)}};
  }
  j["coefficients"] = coef;
  return j;
}

inline json to_json(const CovarianceTest& t) {
  json j;
  j["covariance"] = t.covariance;
  if (t.correlation)
    j["correlation"] = *t.correlation;
  else
    j["correlation"] = nullptr;
  j["se_covariance"] = t.se_covariance;
  j["t_statistic"] = t.t_statistic;
  j["n"] = t.n;
  return j;
}

inline json to_json(const ComparisonReport& r) {
  json j;
  j["unweighted_official_yes_share"] = r.unweighted_official_yes_share;
  j["weighted_official_yes_share"] = r.weighted_official_yes_share;
  j["unweighted_poll_yes_share"] = r.unweighted_poll_yes_share;
  j["weighted_poll_yes_share"] = r.weighted_poll_yes_share;
  j["restricted_official_share"] = r.restricted_official_share;
  j["n_polled"] = r.n_polled;
  return j;
}

inline json to_json(const RepeatReport& r) {
  json j;
  j["total_machines"] = r.total_machines;
  j["machines_in_yes_repeats"] = r.machines_in_yes_repeats;
  j["machines_in_no_repeats"] = r.machines_in_no_repeats;
  j["yes_repeat_frequency"] = r.yes_repeat_frequency;
  j["no_repeat_frequency"] = r.no_repeat_frequency;
  j["distinct_repeated_yes_values"] = r.distinct_repeated_yes_values;
  j["per_precinct_size_rows"] = json::array();
  for (const auto& row : r.per_precinct_size_rows) {
    j["per_precinct_size_rows"].push_back(
        {{"machines_per_precinct", row.machines_per_precinct},
         {"repeats_not_max", row.repeats_not_max},
         {"repeats_max", row.repeats_max},
         {"expected_max_fraction", row.expected_max_fraction}});
  }
  return j;
}

inline json to_json(const std::vector<RepeatMaxCheckRow>& rows) {
  json j = json::array();
  for (const auto& r : rows) {
    j.push_back({{"machines_per_precinct", r.machines_per_precinct},
                 {"repeats_not_max", r.repeats_not_max},
                 {"repeats_max", r.repeats_max},
                 {"observed_max_fraction", r.observed_max_fraction},
                 {"expected_max_fraction", r.expected_max_fraction},
                 {"p_value", r.p_value}});
  }
  return j;
}

inline json to_json(const DispersionReport& r) {
  json j;
  j["eligible_machines"] = r.standardized_deviations.size();
  j["fraction_above_2sd"] = r.fraction_above_2sd;
  j["excluded_single_machine_precincts"] = r.excluded_single_machine_precincts;
  j["excluded_degenerate_precincts"] = r.excluded_degenerate_precincts;
  j["histogram_counts"] = r.histogram;
  j["histogram_bin_edges"] = r.bin_edges;
  j["reference_density"] = r.reference_density;
  return j;
}

inline json to_json(const FraudTestReport& r) {
  json j;
  j["n_precincts"] = r.n_precincts;
  j["excluded_precincts"] = r.excluded_precincts;
  j["threshold"] = r.threshold;
  j["signature_fit"] = to_json(r.signature_fit);
  j["exitpoll_fit"] = to_json(r.exitpoll_fit);
  j["iv_signature_fit"] = to_json(r.iv_signature_fit);
  j["iv_exitpoll_fit"] = to_json(r.iv_exitpoll_fit);
  j["ols_cov_test"] = to_json(r.ols_cov_test);
  j["iv_cov_test"] = to_json(r.iv_cov_test);
  j["verdict"] = r.verdict == FraudVerdict::fraud_consistent
                     ? "fraud_consistent"
                     : "no_fraud_not_rejected";
  return j;
}

inline json to_json(const AuditFit& f) {
  json j;
  j["fit"] = to_json(f.fit);
  j["interaction_coefficient"] = f.interaction_coefficient;
  j["interaction_t"] = f.interaction_t;
  j["n_precincts"] = f.n_precincts;
  j["excluded_precincts"] = f.excluded_precincts;
  return j;
}

inline json to_json(const BootstrapDistribution& d) {
  json j;
  j["replicates"] = d.replicates;
  j["sample_size"] = d.sample_size;
  j["seed"] = d.seed;
  j["mean"] = d.mean;
  j["sd"] = d.sd;
  j["skewness"] = d.skewness;
  j["kurtosis"] = d.kurtosis;
  json pct = json::object();
  for (const auto& [q, v] : d.percentiles) pct[std::to_string(q)] = v;
  j["percentiles"] = pct;
  return j;
}

inline json to_json(const NaiveReport& r) {
  return {{"mean_audited_yes_share", r.mean_audited_yes_share},
          {"mean_unaudited_yes_share", r.mean_unaudited_yes_share},
          {"corr_sig_votes_audited", r.corr_sig_votes_audited},
          {"corr_sig_votes_unaudited", r.corr_sig_votes_unaudited},
          {"note", "unconditional means and correlations are not a randomness "
                   "test; see the interaction regression"}};
}

}  // namespace forensics
