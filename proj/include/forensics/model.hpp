#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace forensics {

using count_t = std::int64_t;

// One voting machine's tallies inside a precinct.
struct MachineRecord {
  std::string machine_id;
  std::string precinct_id;
  count_t yes_votes = 0;
  count_t no_votes = 0;
  count_t registered_voters = 0;

  count_t votes_cast() const { return yes_votes + no_votes; }
};

// Precinct-level aggregates. exit_poll_yes is the poll's predicted YES count
// given the voters that actually showed up; absent means the precinct was not
// polled (0 is a legitimate poll outcome, never a marker).
struct PrecinctRecord {
  std::string precinct_id;
  count_t yes_votes = 0;
  count_t signatures = 0;
  std::optional<count_t> exit_poll_yes;
  count_t registered_at_reafirmazo = 0;
  count_t new_voters = 0;
  count_t non_voters = 0;
  double turnout = 0.0;
  bool audited = false;

  count_t electorate() const { return registered_at_reafirmazo + new_voters; }
  count_t voters_showed_up() const { return electorate() - non_voters; }
};

enum class Pollster { sumate, primero_justicia, merged };

struct ExitPollRow {
  std::string precinct_id;
  count_t poll_yes = 0;
  count_t poll_total = 0;
  Pollster pollster = Pollster::merged;
};

struct Dataset {
  std::vector<MachineRecord> machines;
  std::vector<PrecinctRecord> precincts;
  std::vector<ExitPollRow> polls;
  std::string provenance;

  const PrecinctRecord* find_precinct(const std::string& id) const {
    for (const auto& p : precincts)
      if (p.precinct_id == id) return &p;
    return nullptr;
  }
};

struct Violation {
  std::string record;  // machine_id or precinct_id
  std::string rule;
  std::string detail;

  bool operator<(const Violation& o) const {
    return std::tie(record, rule, detail) < std::tie(o.record, o.rule, o.detail);
  }
  bool operator==(const Violation& o) const {
    return record == o.record && rule == o.rule && detail == o.detail;
  }
};

// Violations are broken invariants; notes flag valid-but-limited data, e.g.
// single-machine precincts where the within-precinct dispersion test cannot
// apply.
struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<Violation> notes;

  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport rep;
  auto violate = [&](const std::string& rec, const std::string& rule,
                     std::string detail = "") {
    rep.violations.push_back({rec, rule, std::move(detail)});
  };

  std::unordered_map<std::string, const PrecinctRecord*> by_id;
  for (const auto& p : d.precincts) {
    if (!by_id.emplace(p.precinct_id, &p).second)
      violate(p.precinct_id, "duplicate precinct_id");
  }

  for (const auto& p : d.precincts) {
    if (p.yes_votes > p.electorate())
      violate(p.precinct_id, "yes votes exceed electorate",
              std::to_string(p.yes_votes) + " > " + std::to_string(p.electorate()));
    if (p.electorate() > 0) {
      double expected = 1.0 - static_cast<double>(p.non_voters) /
                                  static_cast<double>(p.electorate());
      if (std::abs(p.turnout - expected) > 1e-9)
        violate(p.precinct_id, "turnout inconsistent with non_voters");
    }
    if (p.turnout < 0.0 || p.turnout > 1.0)
      violate(p.precinct_id, "turnout outside [0,1]");
  }

  std::unordered_map<std::string, std::unordered_set<std::string>> seen_machine;
  std::unordered_map<std::string, count_t> machine_yes_sum;
  std::unordered_map<std::string, count_t> machine_count;
  for (const auto& m : d.machines) {
    if (m.yes_votes + m.no_votes > m.registered_voters)
      violate(m.machine_id, "tallies exceed registered",
              std::to_string(m.votes_cast()) + " > " +
                  std::to_string(m.registered_voters));
    if (!seen_machine[m.precinct_id].insert(m.machine_id).second)
      violate(m.machine_id, "duplicate machine_id within precinct",
              "precinct " + m.precinct_id);
    if (!by_id.count(m.precinct_id)) {
      violate(m.machine_id, "unknown precinct_id", m.precinct_id);
    } else {
      machine_yes_sum[m.precinct_id] += m.yes_votes;
      machine_count[m.precinct_id] += 1;
    }
  }

  for (const auto& p : d.precincts) {
    auto it = machine_count.find(p.precinct_id);
    if (it == machine_count.end()) continue;
    if (machine_yes_sum[p.precinct_id] != p.yes_votes)
      violate(p.precinct_id, "machine yes totals disagree with precinct",
              std::to_string(machine_yes_sum[p.precinct_id]) + " vs " +
                  std::to_string(p.yes_votes));
    if (it->second == 1)
      rep.notes.push_back({p.precinct_id, "dispersion-inapplicable",
                           "single machine precinct"});
  }

  // Deterministic, order-independent output: report as a sorted multiset.
  std::sort(rep.violations.begin(), rep.violations.end());
  std::sort(rep.notes.begin(), rep.notes.end());
  return rep;
}

}  // namespace forensics
