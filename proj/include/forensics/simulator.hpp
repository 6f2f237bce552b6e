#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "forensics/model.hpp"
#include "forensics/rng.hpp"

namespace forensics {

enum class FraudKind {
  none,
  proportional,           // every precinct keeps keep_fraction of its YES
  nonproportional_band,   // YES reduced where the signature share is extreme
  cap,                    // per-machine ceiling on YES, overflow moved to NO
  signature_correlated,   // tampered subset shaved more where signatures high
  subset_only             // proportional shave in a random subset only
};

struct FraudMechanism {
  FraudKind kind = FraudKind::none;
  double keep_fraction = 1.0;   // proportional
  double band_low = 0.3;        // nonproportional_band
  double band_high = 0.7;
  count_t cap_level = 0;        // cap
  double tampered_share = 1.0;  // subset_only, signature_correlated
  double magnitude = 0.0;       // shave fraction / elasticity reduction
};

enum class AuditKind { uniform_random, clean_only };

struct AuditStrategy {
  AuditKind kind = AuditKind::uniform_random;
  long sample_size = 0;
  std::uint64_t seed = 0;
};

// Count distribution specs. Precinct electorates are log-normal (right-skewed
// like real precinct populations); machine counts uniform on a range.
struct SizeSpec {
  double mean = 1200.0;
  double log_sd = 0.4;
};

struct MachineSpec {
  int min_machines = 1;
  int max_machines = 1;
};

struct SimulationParams {
  long n_precincts = 342;
  double alpha = 0.85;      // exit-poll loading on intent
  double beta = 0.9;        // signature loading on intent
  double sd_epsilon = 0.15; // poll noise, relative to the loaded intent
  double sd_eta = 0.05;     // signature noise, relative
  double rho = 0.0;         // fraud-signature coupling applied to every precinct
  FraudMechanism fraud;
  SizeSpec voters_per_precinct;
  MachineSpec machines_per_precinct;
  std::uint64_t seed = 0;

  // Latent-intent model. The default draws an intent share per precinct; the
  // signatures_first variant reproduces the uniform signature band with a
  // truncated-normal vote error (normal in shape, hard-bounded as stated).
  bool signatures_first = false;
  double signature_slope = 0.7;
  double trunc_error_halfwidth = 0.1;
  double sig_share_low = 0.1;
  double sig_share_high = 0.8;
  double intent_share_mean = 0.42;
  double intent_share_sd = 0.15;
  double turnout_mean = 0.62;
  double turnout_sd = 0.08;
  double new_voter_base = 0.10;
  double new_voter_size_coupling = 0.03;
  double new_voter_sd = 0.02;

  std::optional<AuditStrategy> audit;
};

struct PrecinctTruth {
  std::string precinct_id;
  double chi = 0.0;  // true YES intent among voters who showed up
  double phi = 0.0;  // fraud: official tally minus intent
  bool tampered = false;
};

// Ground truth travels alongside the Dataset, never inside it; serializing
// the Dataset cannot leak chi or phi to the analysis modules.
struct SimulationOutput {
  Dataset dataset;
  std::vector<PrecinctTruth> truth;
  long clamped_precincts = 0;
};

namespace detail {

inline double truncated_normal(std::mt19937_64& rng, double sd, double bound) {
  std::normal_distribution<double> normal(0.0, sd);
  for (int tries = 0; tries < 1000; ++tries) {
    double x = normal(rng);
    if (std::abs(x) <= bound) return x;
  }
  return 0.0;
}

// Balanced partition of total into k parts, remainder to the first parts.
inline std::vector<count_t> balanced_split(count_t total, int k) {
  std::vector<count_t> parts(k, total / k);
  for (count_t i = 0; i < total % k; ++i) parts[i]++;
  return parts;
}

}  // namespace detail

inline std::vector<MachineRecord> split_to_machines(Dataset& d,
                                                    const SimulationParams& params);
inline void split_to_machines(SimulationOutput& out, const SimulationParams& params);
inline void select_audit(SimulationOutput& out, const AuditStrategy& strategy);

// Draw the precinct-level synthetic election. Per-precinct randomness comes
// from sub_rng(seed, i), so parallel generation equals serial generation.
inline SimulationOutput generate(const SimulationParams& params) {
  if (params.n_precincts < 10)
    throw std::invalid_argument("generate: n_precincts < 10");
  if (!(params.alpha > 0.0) || !(params.beta > 0.0))
    throw std::invalid_argument("generate: loadings must be positive");

  SimulationOutput out;
  out.dataset.provenance = "simulated";
  out.dataset.precincts.reserve(params.n_precincts);
  out.truth.reserve(params.n_precincts);

  std::vector<double> chi(params.n_precincts);
  long negative_precincts = 0;

  double log_mean = std::log(params.voters_per_precinct.mean) -
                    0.5 * params.voters_per_precinct.log_sd *
                        params.voters_per_precinct.log_sd;

  for (long i = 0; i < params.n_precincts; ++i) {
    auto rng = sub_rng(params.seed, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal(0.0, 1.0);

    double lv = log_mean + params.voters_per_precinct.log_sd * normal(rng);
    count_t electorate = std::max<count_t>(120, round_count(std::exp(lv)));
    double size_z = params.voters_per_precinct.log_sd > 0.0
                        ? (lv - log_mean) / params.voters_per_precinct.log_sd
                        : 0.0;

    double new_frac = std::clamp(params.new_voter_base +
                                     params.new_voter_size_coupling * size_z +
                                     params.new_voter_sd * normal(rng),
                                 0.01, 0.30);
    count_t new_voters = std::max<count_t>(1, round_count(new_frac * electorate));
    count_t registered = electorate - new_voters;

    double turnout = std::clamp(params.turnout_mean + params.turnout_sd * normal(rng),
                                0.30, 0.95);
    count_t showed = std::max<count_t>(10, round_count(turnout * electorate));
    count_t non_voters = electorate - showed;

    double chi_i;
    count_t signatures;
    if (params.signatures_first) {
      std::uniform_real_distribution<double> ushare(params.sig_share_low,
                                                    params.sig_share_high);
      signatures = std::max<count_t>(1, round_count(ushare(rng) * electorate));
      double err = detail::truncated_normal(rng, params.trunc_error_halfwidth / 2.0,
                                            params.trunc_error_halfwidth);
      chi_i = params.signature_slope * static_cast<double>(signatures) * (1.0 + err);
    } else {
      double q = std::clamp(params.intent_share_mean +
                                params.intent_share_sd * normal(rng),
                            0.05, 0.95);
      chi_i = q * static_cast<double>(showed);
      double s_lat = params.beta * chi_i * (1.0 + params.sd_eta * normal(rng));
      signatures = std::max<count_t>(1, round_count(s_lat));
    }
    chi_i = std::clamp(chi_i, 1.0, static_cast<double>(showed));
    count_t chi_count = std::max<count_t>(1, round_count(chi_i));

    double e_lat = params.alpha * static_cast<double>(chi_count) *
                   (1.0 + params.sd_epsilon * normal(rng));
    if (e_lat < 0.0) negative_precincts++;
    count_t poll_yes = std::clamp<count_t>(round_count(e_lat), 0, showed);

    PrecinctRecord p;
    p.precinct_id = "P" + std::to_string(i);
    p.signatures = signatures;
    p.registered_at_reafirmazo = registered;
    p.new_voters = new_voters;
    p.non_voters = non_voters;
    p.turnout = 1.0 - static_cast<double>(non_voters) / static_cast<double>(electorate);
    p.exit_poll_yes = poll_yes;
    p.yes_votes = chi_count;  // fraud applied below
    out.dataset.precincts.push_back(std::move(p));
    out.dataset.polls.push_back(
        {"P" + std::to_string(i), poll_yes, showed, Pollster::merged});
    chi[i] = static_cast<double>(chi_count);
    out.truth.push_back({"P" + std::to_string(i), chi[i], 0.0, false});
  }

  // Fraud pass. signature_correlated needs the mean log signature level, so
  // fraud is applied after all precincts are drawn.
  double mean_log_sig = 0.0;
  for (const auto& p : out.dataset.precincts)
    mean_log_sig += std::log(static_cast<double>(std::max<count_t>(1, p.signatures)));
  mean_log_sig /= static_cast<double>(params.n_precincts);

  for (long i = 0; i < params.n_precincts; ++i) {
    auto rng = sub_rng(params.seed ^ 0x5eedf00dull, static_cast<std::uint64_t>(i));
    auto& p = out.dataset.precincts[i];
    auto& t = out.truth[i];
    count_t showed = p.voters_showed_up();

    double nu = chi[i] + params.rho * static_cast<double>(p.signatures);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto& f = params.fraud;
    switch (f.kind) {
      case FraudKind::none:
      case FraudKind::cap:  // applied per machine in split_to_machines
        break;
      case FraudKind::proportional:
        nu *= f.keep_fraction;
        t.tampered = true;
        break;
      case FraudKind::nonproportional_band: {
        double share = p.registered_at_reafirmazo > 0
                           ? static_cast<double>(p.signatures) /
                                 static_cast<double>(p.registered_at_reafirmazo)
                           : 0.0;
        if (share < f.band_low || share > f.band_high) {
          nu *= (1.0 - f.magnitude);
          t.tampered = true;
        }
        break;
      }
      case FraudKind::signature_correlated:
        if (unit(rng) < f.tampered_share) {
          double ls = std::log(static_cast<double>(std::max<count_t>(1, p.signatures)));
          nu *= std::exp(-f.magnitude * (ls - mean_log_sig));
          t.tampered = true;
        }
        break;
      case FraudKind::subset_only:
        if (unit(rng) < f.tampered_share) {
          nu *= (1.0 - f.magnitude);
          t.tampered = true;
        }
        break;
    }

    if (nu < -0.5) negative_precincts++;
    count_t yes = std::clamp<count_t>(round_count(nu), 0, showed);
    p.yes_votes = yes;
    t.phi = static_cast<double>(yes) - chi[i];
  }

  if (negative_precincts > params.n_precincts / 10) {
    throw std::runtime_error(
        "generate: parameters drive counts negative in > 10% of precincts");
  }
  out.clamped_precincts = negative_precincts;

  if (params.machines_per_precinct.max_machines >= 1)
    split_to_machines(out, params);

  if (params.audit) select_audit(out, *params.audit);
  return out;
}

// Distribute each precinct's voters over its machines (balanced counts, the
// way near-uniform id-digit assignment does) and deal out the YES votes
// without replacement, so machine tallies are exchangeable random splits that
// sum exactly to the precinct tallies. Cap fraud applies here, per machine,
// and the precinct tallies are re-aggregated afterwards.
inline std::vector<MachineRecord> split_to_machines(Dataset& d,
                                                    const SimulationParams& params) {
  std::vector<MachineRecord> machines;
  for (std::size_t i = 0; i < d.precincts.size(); ++i) {
    auto& p = d.precincts[i];
    auto rng = sub_rng(params.seed ^ 0x11ac71e5ull, static_cast<std::uint64_t>(i));
    int k = params.machines_per_precinct.min_machines;
    if (params.machines_per_precinct.max_machines > k) {
      std::uniform_int_distribution<int> pick(
          params.machines_per_precinct.min_machines,
          params.machines_per_precinct.max_machines);
      k = pick(rng);
    }
    if (k < 1) k = 1;

    count_t showed = p.voters_showed_up();
    auto votes_per_machine = detail::balanced_split(showed, k);
    auto reg_per_machine = detail::balanced_split(p.electorate(), k);

    // Sequential without-replacement deal of the precinct's YES votes.
    count_t yes_left = p.yes_votes;
    count_t votes_left = showed;
    count_t precinct_yes_after = 0;
    for (int m = 0; m < k; ++m) {
      count_t yes_m = 0;
      if (m == k - 1) {
        yes_m = yes_left;
      } else {
        for (count_t v = 0; v < votes_per_machine[m]; ++v) {
          std::uniform_int_distribution<count_t> pick(1, votes_left - v);
          if (pick(rng) <= yes_left - yes_m) yes_m++;
        }
      }
      yes_left -= yes_m;
      votes_left -= votes_per_machine[m];

      if (params.fraud.kind == FraudKind::cap && params.fraud.cap_level > 0)
        yes_m = std::min(yes_m, params.fraud.cap_level);

      MachineRecord rec;
      rec.machine_id = p.precinct_id + "-M" + std::to_string(m);
      rec.precinct_id = p.precinct_id;
      rec.yes_votes = yes_m;
      rec.no_votes = votes_per_machine[m] - yes_m;
      rec.registered_voters = reg_per_machine[m];
      precinct_yes_after += yes_m;
      machines.push_back(std::move(rec));
    }
    p.yes_votes = precinct_yes_after;
  }
  return machines;
}

inline void split_to_machines(SimulationOutput& out, const SimulationParams& params) {
  out.dataset.machines = split_to_machines(out.dataset, params);
  // Cap fraud changes tallies at the machine level; refresh phi.
  for (std::size_t i = 0; i < out.truth.size(); ++i) {
    auto& t = out.truth[i];
    double phi = static_cast<double>(out.dataset.precincts[i].yes_votes) - t.chi;
    if (params.fraud.kind == FraudKind::cap && phi != t.phi) t.tampered = true;
    t.phi = phi;
  }
}

// Mark audited precincts. uniform_random draws from every precinct;
// clean_only draws only from precincts the fraud did not touch (phi == 0).
inline void select_audit(SimulationOutput& out, const AuditStrategy& strategy) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < out.dataset.precincts.size(); ++i) {
    out.dataset.precincts[i].audited = false;
    if (strategy.kind == AuditKind::uniform_random || out.truth[i].phi == 0.0)
      pool.push_back(i);
  }
  if (strategy.sample_size > static_cast<long>(pool.size()))
    throw std::runtime_error(strategy.kind == AuditKind::clean_only
                                 ? "select_audit: insufficient clean precincts"
                                 : "select_audit: sample_size exceeds universe");
  auto rng = sub_rng(strategy.seed, 0xa0d17ull);
  for (std::size_t i = 0; i < static_cast<std::size_t>(strategy.sample_size); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    out.dataset.precincts[pool[i]].audited = true;
  }
}

// Named parameter presets addressable from the CLI.
inline SimulationParams preset_params(const std::string& name, std::uint64_t seed) {
  SimulationParams p;
  p.seed = seed;
  if (name == "null") {
    p.n_precincts = 342;
    p.machines_per_precinct = {4, 8};
    p.audit = AuditStrategy{AuditKind::uniform_random, 50, seed};
  } else if (name == "fig3a" || name == "fig3b" || name == "fig3c") {
    p.n_precincts = 2000;
    p.signatures_first = true;
    p.turnout_mean = 0.72;
    p.turnout_sd = 0.05;
    if (name == "fig3b") {
      p.fraud.kind = FraudKind::proportional;
      p.fraud.keep_fraction = 0.7;
    } else if (name == "fig3c") {
      p.fraud.kind = FraudKind::nonproportional_band;
      p.fraud.band_low = 0.3;
      p.fraud.band_high = 0.7;
      p.fraud.magnitude = 0.3;
    }
  } else if (name == "caps") {
    p.n_precincts = 342;
    p.voters_per_precinct = {1200.0, 0.15};
    p.machines_per_precinct = {6, 6};
    p.fraud.kind = FraudKind::cap;
    p.fraud.cap_level = 48;
  } else if (name == "audit_evasion") {
    p.n_precincts = 4580;
    p.sd_eta = 0.10;
    p.fraud.kind = FraudKind::signature_correlated;
    p.fraud.tampered_share = 3000.0 / 4580.0;
    p.fraud.magnitude = 0.15;
    p.audit = AuditStrategy{AuditKind::clean_only, 200, seed};
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return p;
}

}  // namespace forensics
