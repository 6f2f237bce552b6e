// Election-forensics command line: ingestion checks, descriptive poll
// comparison, machine-level diagnostics, the residual-covariance fraud test,
// the audit-randomness test, and the synthetic-election simulator.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "forensics/audit.hpp"
#include "forensics/diagnostics.hpp"
#include "forensics/fraudtest.hpp"
#include "forensics/ingest.hpp"
#include "forensics/report.hpp"
#include "forensics/simulator.hpp"

namespace fs = std::filesystem;
using namespace forensics;

namespace {

struct CommonOpts {
  std::string data_dir;
  std::string out_dir;
  bool strict = false;
};

struct Inputs {
  LoadResult loaded;
  json digests;
};

Inputs load_inputs(const CommonOpts& opts) {
  std::string machines = opts.data_dir + "/machines.csv";
  std::string precincts = opts.data_dir + "/precincts.csv";
  std::optional<std::string> polls, audit;
  if (fs::exists(opts.data_dir + "/polls.csv")) polls = opts.data_dir + "/polls.csv";
  if (fs::exists(opts.data_dir + "/audit.csv")) audit = opts.data_dir + "/audit.csv";

  Inputs in;
  in.loaded = load_dataset(machines, precincts, polls, audit);
  in.digests["machines.csv"] = file_digest(machines);
  in.digests["precincts.csv"] = file_digest(precincts);
  if (polls) in.digests["polls.csv"] = file_digest(*polls);
  if (audit) in.digests["audit.csv"] = file_digest(*audit);

  if (opts.strict && !in.loaded.validation.ok()) {
    std::string msg = "strict mode: dataset fails validation:";
    for (const auto& v : in.loaded.validation.violations)
      msg += "\n  " + v.record + ": " + v.rule +
             (v.detail.empty() ? "" : " (" + v.detail + ")");
    throw std::runtime_error(msg);
  }
  if (opts.strict && !in.loaded.join_failures.empty()) {
    std::string msg = "strict mode: join failures:";
    for (const auto& f : in.loaded.join_failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }
  return in;
}

json base_report(const std::string& subcommand, const json& run_config,
                 const json& digests) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["subcommand"] = subcommand;
  j["run_config"] = run_config;
  j["input_digests"] = digests;
  return j;
}

void write_report(const std::string& out_dir, const json& j) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir + "/report.json");
  if (!out) throw std::runtime_error("cannot write " + out_dir + "/report.json");
  out << j.dump(2) << '\n';
}

Pollster parse_pollster_flag(const std::string& s) {
  if (s == "sumate") return Pollster::sumate;
  if (s == "primero_justicia") return Pollster::primero_justicia;
  if (s == "merged") return Pollster::merged;
  throw CLI::ValidationError("--pollster", "unknown pollster '" + s + "'");
}

json comparison_section(const Dataset& d, Pollster who, const std::string& out_dir) {
  auto rep = compare_polls_to_votes(d, who);
  csv::Writer w(out_dir + "/poll_scatter.csv");
  w.row({"precinct_id", "official_share", "poll_share"});
  for (std::size_t i = 0; i < rep.per_precinct_pairs.size(); ++i) {
    char a[32], b[32];
    std::snprintf(a, sizeof a, "%.17g", rep.per_precinct_pairs[i].first);
    std::snprintf(b, sizeof b, "%.17g", rep.per_precinct_pairs[i].second);
    w.row({rep.polled_precinct_ids[i], a, b});
  }
  return to_json(rep);
}

json diagnose_section(const Dataset& d, const std::string& out_dir) {
  json j;
  auto repeats = repeated_counts(d.machines);
  j["repeats"] = to_json(repeats);
  if (!repeats.per_precinct_size_rows.empty())
    j["repeat_max_check"] = to_json(repeat_max_randomness_check(repeats));
  auto disp = binomial_dispersion(d.machines);
  j["dispersion"] = to_json(disp);
  csv::Writer w(out_dir + "/dispersion_hist.csv");
  w.row({"bin_left", "bin_right", "count", "reference_density"});
  for (std::size_t b = 0; b < disp.histogram.size(); ++b) {
    char lo[32], hi[32], dens[32];
    std::snprintf(lo, sizeof lo, "%.17g", disp.bin_edges[b]);
    std::snprintf(hi, sizeof hi, "%.17g", disp.bin_edges[b + 1]);
    std::snprintf(dens, sizeof dens, "%.17g", disp.reference_density[b]);
    w.row({lo, hi, std::to_string(disp.histogram[b]), dens});
  }
  return j;
}

json audit_section(const Dataset& d, long replicates, long sample_size,
                   std::uint64_t seed, double level, const std::string& out_dir) {
  json j;
  auto fit = interaction_regression(d);
  auto dist = bootstrap_t_distribution(d, replicates, sample_size, seed);
  auto verdict = randomness_verdict(fit, dist, level);
  j["interaction"] = to_json(fit);
  j["bootstrap"] = to_json(dist);
  j["naive_checks"] = to_json(naive_checks(d));
  j["level"] = level;
  j["verdict"] = verdict == RandomnessVerdict::not_random ? "not_random"
                                                          : "consistent_with_random";
  csv::Writer w(out_dir + "/bootstrap_t.csv");
  w.row({"t_value"});
  for (double t : dist.t_values) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    w.row({buf});
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Election forensics toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string preset = "null";
  std::uint64_t seed = 0;
  bool seed_given = false;
  long n_precincts = 0;
  long replicates = 1000;
  long sample_size = 200;
  double threshold = 2.576;
  double level = 0.01;
  std::string pollster = "merged";

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--data", opts.data_dir, "input directory")->required();
    if (needs_out) cmd->add_option("--out", opts.out_dir, "output directory")->required();
    cmd->add_flag("--strict", opts.strict, "escalate validation violations to errors");
  };
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed (required, never time-based)")
        ->each([&](const std::string&) { seed_given = true; })
        ->required();
  };

  auto* c_sim = app.add_subcommand("simulate", "generate a synthetic election");
  c_sim->add_option("--preset", preset, "null|fig3a|fig3b|fig3c|caps|audit_evasion");
  c_sim->add_option("--n-precincts", n_precincts, "override preset precinct count");
  c_sim->add_option("--out", opts.out_dir, "output directory")->required();
  add_seed(c_sim);

  auto* c_ing = app.add_subcommand("ingest-check", "parse, join and validate inputs");
  add_common(c_ing, false);
  c_ing->add_option("--out", opts.out_dir, "optional report directory");

  auto* c_cmp = app.add_subcommand("compare-polls", "official vs exit-poll YES shares");
  add_common(c_cmp, true);
  c_cmp->add_option("--pollster", pollster, "sumate|primero_justicia|merged");

  auto* c_diag = app.add_subcommand("diagnose", "repeated counts and binomial dispersion");
  add_common(c_diag, true);

  auto* c_fraud = app.add_subcommand("fraud-test", "residual covariance fraud test");
  add_common(c_fraud, true);
  c_fraud->add_option("--threshold", threshold, "IV covariance t threshold");

  auto* c_audit = app.add_subcommand("audit-test", "audit-sample randomness test");
  add_common(c_audit, true);
  c_audit->add_option("--replicates", replicates, "bootstrap replicates");
  c_audit->add_option("--sample-size", sample_size, "pseudo-audit sample size");
  c_audit->add_option("--level", level, "verdict significance level");
  add_seed(c_audit);

  auto* c_full = app.add_subcommand("full-report", "run every applicable analysis");
  add_common(c_full, true);
  c_full->add_option("--threshold", threshold, "IV covariance t threshold");
  c_full->add_option("--replicates", replicates, "bootstrap replicates");
  c_full->add_option("--sample-size", sample_size, "pseudo-audit sample size");
  c_full->add_option("--level", level, "verdict significance level");
  add_seed(c_full);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage errors exit 2
  }

  try {
    if (c_sim->parsed()) {
      auto params = preset_params(preset, seed);
      if (n_precincts > 0) params.n_precincts = n_precincts;
      auto sim = generate(params);
      fs::create_directories(opts.out_dir);
      write_dataset(sim.dataset, opts.out_dir);
      csv::Writer w(opts.out_dir + "/ground_truth.csv");
      w.row({"precinct_id", "chi", "phi"});
      for (const auto& t : sim.truth) {
        char a[32], b[32];
        std::snprintf(a, sizeof a, "%.17g", t.chi);
        std::snprintf(b, sizeof b, "%.17g", t.phi);
        w.row({t.precinct_id, a, b});
      }
      json cfg = {{"preset", preset}, {"seed", seed},
                  {"n_precincts", params.n_precincts}};
      json j = base_report("simulate", cfg, json::object());
      j["clamped_precincts"] = sim.clamped_precincts;
      write_report(opts.out_dir, j);
      return 0;
    }

    json cfg = {{"data", opts.data_dir}, {"strict", opts.strict}};
    Inputs in = load_inputs(opts);
    const Dataset& d = in.loaded.dataset;

    if (c_ing->parsed()) {
      json j = base_report("ingest-check", cfg, in.digests);
      j["validation"] = to_json(in.loaded.validation);
      j["join_failures"] = in.loaded.join_failures;
      if (!opts.out_dir.empty())
        write_report(opts.out_dir, j);
      else
        std::cout << j.dump(2) << '\n';
      return in.loaded.validation.ok() && in.loaded.join_failures.empty() ? 0 : 1;
    }

    fs::create_directories(opts.out_dir);

    if (c_cmp->parsed()) {
      cfg["pollster"] = pollster;
      json j = base_report("compare-polls", cfg, in.digests);
      j["comparison"] = comparison_section(d, parse_pollster_flag(pollster), opts.out_dir);
      write_report(opts.out_dir, j);
    } else if (c_diag->parsed()) {
      json j = base_report("diagnose", cfg, in.digests);
      j["diagnostics"] = diagnose_section(d, opts.out_dir);
      write_report(opts.out_dir, j);
    } else if (c_fraud->parsed()) {
      cfg["threshold"] = threshold;
      json j = base_report("fraud-test", cfg, in.digests);
      j["fraud"] = to_json(run_fraud_test(d, threshold));
      write_report(opts.out_dir, j);
    } else if (c_audit->parsed()) {
      cfg["replicates"] = replicates;
      cfg["sample_size"] = sample_size;
      cfg["seed"] = seed;
      cfg["level"] = level;
      json j = base_report("audit-test", cfg, in.digests);
      j["audit"] = audit_section(d, replicates, sample_size, seed, level, opts.out_dir);
      write_report(opts.out_dir, j);
    } else if (c_full->parsed()) {
      cfg["threshold"] = threshold;
      cfg["replicates"] = replicates;
      cfg["sample_size"] = sample_size;
      cfg["seed"] = seed;
      cfg["level"] = level;
      json j = base_report("full-report", cfg, in.digests);
      j["validation"] = to_json(in.loaded.validation);
      bool polled = false, audited = false;
      for (const auto& p : d.precincts) {
        polled = polled || p.exit_poll_yes.has_value();
        audited = audited || p.audited;
      }
      if (polled) {
        j["comparison"] = comparison_section(d, Pollster::merged, opts.out_dir);
        j["fraud"] = to_json(run_fraud_test(d, threshold));
      }
      if (!d.machines.empty()) j["diagnostics"] = diagnose_section(d, opts.out_dir);
      if (audited)
        j["audit"] = audit_section(d, replicates, sample_size, seed, level, opts.out_dir);
      write_report(opts.out_dir, j);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
