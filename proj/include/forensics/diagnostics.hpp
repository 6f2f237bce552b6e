#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "forensics/model.hpp"
#include "forensics/stats.hpp"

namespace forensics {

// Repeated-count ("caps") analysis. A machine is "in a repeat" for YES (or NO)
// when at least one other machine in its precinct printed the identical total.
// The per-size rows count distinct repeated YES values, split by whether the
// repeated value equals the precinct's maximum YES total.
struct RepeatSizeRow {
  int machines_per_precinct = 0;
  count_t repeats_not_max = 0;
  count_t repeats_max = 0;
  double expected_max_fraction = 0.0;  // 1/(k-1)
};

struct RepeatReport {
  count_t total_machines = 0;
  count_t machines_in_yes_repeats = 0;
  count_t machines_in_no_repeats = 0;
  double yes_repeat_frequency = 0.0;
  double no_repeat_frequency = 0.0;
  std::vector<RepeatSizeRow> per_precinct_size_rows;
  count_t distinct_repeated_yes_values = 0;  // Table-3-style total
};

inline RepeatReport repeated_counts(const std::vector<MachineRecord>& machines) {
  std::unordered_map<std::string, std::vector<const MachineRecord*>> groups;
  for (const auto& m : machines) groups[m.precinct_id].push_back(&m);

  RepeatReport rep;
  rep.total_machines = static_cast<count_t>(machines.size());
  std::map<int, RepeatSizeRow> rows;

  for (const auto& [pid, ms] : groups) {
    std::map<count_t, int> yes_counts, no_counts;
    count_t yes_max = 0;
    for (const auto* m : ms) {
      yes_counts[m->yes_votes]++;
      no_counts[m->no_votes]++;
      yes_max = std::max(yes_max, m->yes_votes);
    }
    for (const auto* m : ms) {
      if (yes_counts[m->yes_votes] > 1) rep.machines_in_yes_repeats++;
      if (no_counts[m->no_votes] > 1) rep.machines_in_no_repeats++;
    }
    int k = static_cast<int>(ms.size());
    bool any_repeat = false;
    for (const auto& [value, cnt] : yes_counts) {
      if (cnt < 2) continue;
      any_repeat = true;
      auto& row = rows[k];
      if (value == yes_max)
        row.repeats_max++;
      else
        row.repeats_not_max++;
      rep.distinct_repeated_yes_values++;
    }
    if (any_repeat) {
      rows[k].machines_per_precinct = k;
      rows[k].expected_max_fraction = k >= 2 ? 1.0 / (k - 1) : 1.0;
    }
  }

  for (auto& [k, row] : rows) rep.per_precinct_size_rows.push_back(row);
  if (rep.total_machines > 0) {
    rep.yes_repeat_frequency = static_cast<double>(rep.machines_in_yes_repeats) /
                               static_cast<double>(rep.total_machines);
    rep.no_repeat_frequency = static_cast<double>(rep.machines_in_no_repeats) /
                              static_cast<double>(rep.total_machines);
  }
  return rep;
}

struct RepeatMaxCheckRow {
  int machines_per_precinct = 0;
  count_t repeats_not_max = 0;
  count_t repeats_max = 0;
  double observed_max_fraction = 0.0;
  double expected_max_fraction = 0.0;
  double p_value = 1.0;  // two-sided exact binomial
};

// Under random counts the repeated value is the precinct maximum with
// probability 1/(k-1); with two machines the repeated value is both the
// maximum and the minimum, so the expected fraction is exactly 1.
inline std::vector<RepeatMaxCheckRow> repeat_max_randomness_check(
    const RepeatReport& report) {
  if (report.per_precinct_size_rows.empty())
    throw std::invalid_argument("repeat_max_randomness_check: no repeat rows");
  std::vector<RepeatMaxCheckRow> out;
  for (const auto& row : report.per_precinct_size_rows) {
    RepeatMaxCheckRow r;
    r.machines_per_precinct = row.machines_per_precinct;
    r.repeats_not_max = row.repeats_not_max;
    r.repeats_max = row.repeats_max;
    count_t total = row.repeats_max + row.repeats_not_max;
    r.observed_max_fraction =
        total > 0 ? static_cast<double>(row.repeats_max) / static_cast<double>(total)
                  : 0.0;
    r.expected_max_fraction = row.expected_max_fraction;
    r.p_value = stats::exact_binomial_p(row.repeats_max, total,
                                        row.expected_max_fraction);
    out.push_back(r);
  }
  return out;
}

struct DispersionReport {
  std::vector<double> standardized_deviations;  // one per eligible machine
  double fraction_above_2sd = 0.0;
  std::vector<double> bin_edges;
  std::vector<count_t> histogram;
  std::vector<double> reference_density;  // standard normal at bin centers
  count_t excluded_single_machine_precincts = 0;
  count_t excluded_degenerate_precincts = 0;  // precinct share 0 or 1
};

// Within-precinct binomial dispersion. Machines receive voters at random, so
// each machine's YES total is binomial around the precinct share: with N_m
// votes cast on the machine, z = (yes - N p) / sqrt(N p (1-p)), p estimated
// from the precinct's pooled tallies.
inline DispersionReport binomial_dispersion(const std::vector<MachineRecord>& machines) {
  std::unordered_map<std::string, std::vector<const MachineRecord*>> groups;
  for (const auto& m : machines) groups[m.precinct_id].push_back(&m);

  DispersionReport rep;
  std::vector<std::pair<std::string, const std::vector<const MachineRecord*>*>> ordered;
  for (const auto& [pid, ms] : groups) ordered.emplace_back(pid, &ms);
  std::sort(ordered.begin(), ordered.end());

  for (const auto& [pid, msp] : ordered) {
    const auto& ms = *msp;
    if (ms.size() < 2) {
      rep.excluded_single_machine_precincts++;
      continue;
    }
    count_t yes = 0, cast = 0;
    for (const auto* m : ms) {
      yes += m->yes_votes;
      cast += m->votes_cast();
    }
    double p = cast > 0 ? static_cast<double>(yes) / static_cast<double>(cast) : 0.0;
    if (p <= 0.0 || p >= 1.0) {
      rep.excluded_degenerate_precincts++;
      continue;
    }
    for (const auto* m : ms) {
      double nm = static_cast<double>(m->votes_cast());
      if (nm <= 0.0) continue;
      double z = (static_cast<double>(m->yes_votes) - nm * p) /
                 std::sqrt(nm * p * (1.0 - p));
      rep.standardized_deviations.push_back(z);
    }
  }

  std::size_t n = rep.standardized_deviations.size();
  if (n > 0) {
    std::size_t above = 0;
    for (double z : rep.standardized_deviations)
      if (std::abs(z) > 2.0) ++above;
    rep.fraction_above_2sd = static_cast<double>(above) / static_cast<double>(n);
  }

  // Fixed bins over [-5, 5], width 0.25; out-of-range z lands in the edge
  // bins so counts always sum to the number of eligible machines.
  const int nbins = 40;
  const double lo = -5.0, hi = 5.0, w = (hi - lo) / nbins;
  rep.histogram.assign(nbins, 0);
  for (int b = 0; b <= nbins; ++b) rep.bin_edges.push_back(lo + b * w);
  for (int b = 0; b < nbins; ++b)
    rep.reference_density.push_back(stats::normal_pdf(lo + (b + 0.5) * w));
  for (double z : rep.standardized_deviations) {
    int b = static_cast<int>(std::floor((z - lo) / w));
    b = std::clamp(b, 0, nbins - 1);
    rep.histogram[b]++;
  }
  return rep;
}

}  // namespace forensics
