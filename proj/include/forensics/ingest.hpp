#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "forensics/csv.hpp"
#include "forensics/model.hpp"
#include "forensics/rng.hpp"

namespace forensics {

struct LoadResult {
  Dataset dataset;
  ValidationReport validation;
  std::vector<std::string> join_failures;  // one entry per rejected input row
};

namespace detail {

inline Pollster parse_pollster(const std::string& s, const std::string& path,
                               std::size_t line) {
  if (s == "sumate") return Pollster::sumate;
  if (s == "primero_justicia") return Pollster::primero_justicia;
  if (s == "merged") return Pollster::merged;
  throw std::runtime_error(path + ":" + std::to_string(line) +
                           ": unknown pollster '" + s + "'");
}

inline int need_column(const csv::Table& t, const std::string& path,
                       const std::string& name) {
  int c = t.column(name);
  if (c < 0) throw std::runtime_error(path + ": missing column '" + name + "'");
  return c;
}

}  // namespace detail

// Parse the machine/precinct/poll/audit CSVs and join them into a Dataset.
// Join key is the precinct_id as an opaque, whitespace-trimmed string.
// Rows that cannot be joined are reported, never dropped silently:
// |input rows| = |joined rows| + |reported failures| per file.
inline LoadResult load_dataset(const std::string& machine_file,
                               const std::string& precinct_file,
                               const std::optional<std::string>& poll_file = {},
                               const std::optional<std::string>& audit_file = {}) {
  LoadResult out;
  Dataset& d = out.dataset;
  d.provenance = precinct_file;

  auto prec = csv::read_file(precinct_file);
  int c_pid = detail::need_column(prec, precinct_file, "precinct_id");
  int c_yes = detail::need_column(prec, precinct_file, "yes_votes");
  int c_sig = detail::need_column(prec, precinct_file, "signatures");
  int c_reg = detail::need_column(prec, precinct_file, "registered_at_reafirmazo");
  int c_new = detail::need_column(prec, precinct_file, "new_voters");
  int c_non = detail::need_column(prec, precinct_file, "non_voters");

  std::unordered_map<std::string, std::size_t> index;
  std::vector<bool> derive_yes;
  for (const auto& row : prec.rows) {
    PrecinctRecord p;
    p.precinct_id = row.fields.at(c_pid);
    bool derived = row.fields.at(c_yes).empty();
    p.yes_votes = derived ? 0 : csv::parse_count(row.fields.at(c_yes), precinct_file, row.line);
    p.signatures = csv::parse_count(row.fields.at(c_sig), precinct_file, row.line);
    p.registered_at_reafirmazo = csv::parse_count(row.fields.at(c_reg), precinct_file, row.line);
    p.new_voters = csv::parse_count(row.fields.at(c_new), precinct_file, row.line);
    p.non_voters = csv::parse_count(row.fields.at(c_non), precinct_file, row.line);
    p.turnout = p.electorate() > 0
                    ? 1.0 - static_cast<double>(p.non_voters) /
                                static_cast<double>(p.electorate())
                    : 0.0;
    if (index.count(p.precinct_id)) {
      out.join_failures.push_back(precinct_file + ":" + std::to_string(row.line) +
                                  ": duplicate precinct_id " + p.precinct_id);
      continue;
    }
    index.emplace(p.precinct_id, d.precincts.size());
    d.precincts.push_back(std::move(p));
    derive_yes.push_back(derived);
  }

  auto mach = csv::read_file(machine_file);
  int m_mid = detail::need_column(mach, machine_file, "machine_id");
  int m_pid = detail::need_column(mach, machine_file, "precinct_id");
  int m_yes = detail::need_column(mach, machine_file, "yes_votes");
  int m_no = detail::need_column(mach, machine_file, "no_votes");
  int m_reg = detail::need_column(mach, machine_file, "registered_voters");
  for (const auto& row : mach.rows) {
    MachineRecord m;
    m.machine_id = row.fields.at(m_mid);
    m.precinct_id = row.fields.at(m_pid);
    m.yes_votes = csv::parse_count(row.fields.at(m_yes), machine_file, row.line);
    m.no_votes = csv::parse_count(row.fields.at(m_no), machine_file, row.line);
    m.registered_voters = csv::parse_count(row.fields.at(m_reg), machine_file, row.line);
    if (!index.count(m.precinct_id)) {
      out.join_failures.push_back(machine_file + ":" + std::to_string(row.line) +
                                  ": unknown precinct_id " + m.precinct_id);
      continue;
    }
    d.machines.push_back(std::move(m));
  }

  // Precinct tallies may be left blank and derived from the machine level;
  // explicit fields win and a conflict surfaces in validation.
  for (std::size_t i = 0; i < d.precincts.size(); ++i) {
    if (!derive_yes[i]) continue;
    count_t total = 0;
    for (const auto& m : d.machines)
      if (m.precinct_id == d.precincts[i].precinct_id) total += m.yes_votes;
    d.precincts[i].yes_votes = total;
  }

  if (poll_file) {
    auto polls = csv::read_file(*poll_file);
    int p_pid = detail::need_column(polls, *poll_file, "precinct_id");
    int p_yes = detail::need_column(polls, *poll_file, "poll_yes");
    int p_tot = detail::need_column(polls, *poll_file, "poll_total");
    int p_who = detail::need_column(polls, *poll_file, "pollster");
    for (const auto& row : polls.rows) {
      ExitPollRow r;
      r.precinct_id = row.fields.at(p_pid);
      r.poll_yes = csv::parse_count(row.fields.at(p_yes), *poll_file, row.line);
      r.poll_total = csv::parse_count(row.fields.at(p_tot), *poll_file, row.line);
      r.pollster = detail::parse_pollster(row.fields.at(p_who), *poll_file, row.line);
      if (r.poll_total <= 0 || r.poll_yes < 0 || r.poll_yes > r.poll_total) {
        out.join_failures.push_back(*poll_file + ":" + std::to_string(row.line) +
                                    ": invalid poll counts for " + r.precinct_id);
        continue;
      }
      auto it = index.find(r.precinct_id);
      if (it == index.end()) {
        out.join_failures.push_back(*poll_file + ":" + std::to_string(row.line) +
                                    ": unknown precinct_id " + r.precinct_id);
        continue;
      }
      d.polls.push_back(r);
      // Canonical e_i: poll YES share scaled to the voters who showed up.
      auto& p = d.precincts[it->second];
      double share = static_cast<double>(r.poll_yes) / static_cast<double>(r.poll_total);
      p.exit_poll_yes = round_count(share * static_cast<double>(p.voters_showed_up()));
    }
  }

  if (audit_file) {
    auto audit = csv::read_file(*audit_file);
    int a_pid = detail::need_column(audit, *audit_file, "precinct_id");
    for (const auto& row : audit.rows) {
      const std::string& id = row.fields.at(a_pid);
      auto it = index.find(id);
      if (it == index.end()) {
        out.join_failures.push_back(*audit_file + ":" + std::to_string(row.line) +
                                    ": unknown precinct_id " + id);
        continue;
      }
      d.precincts[it->second].audited = true;
    }
  }

  out.validation = validate_dataset(d);
  return out;
}

struct ComparisonReport {
  double unweighted_official_yes_share = 0.0;
  double weighted_official_yes_share = 0.0;
  double unweighted_poll_yes_share = 0.0;
  double weighted_poll_yes_share = 0.0;
  double restricted_official_share = 0.0;  // weighted, polled precincts only
  std::vector<std::pair<double, double>> per_precinct_pairs;  // (official, poll)
  std::vector<std::string> polled_precinct_ids;
  long n_polled = 0;
};

// Descriptive comparison of official YES shares with exit-poll YES shares.
// "Weighted" weights each precinct by its total votes cast.
inline ComparisonReport compare_polls_to_votes(const Dataset& d,
                                               Pollster pollster = Pollster::merged) {
  // Aggregate poll rows per precinct, filtered by pollster (merged keeps all).
  std::unordered_map<std::string, std::pair<count_t, count_t>> poll_by_precinct;
  for (const auto& r : d.polls) {
    if (pollster != Pollster::merged && r.pollster != pollster) continue;
    auto& acc = poll_by_precinct[r.precinct_id];
    acc.first += r.poll_yes;
    acc.second += r.poll_total;
  }
  if (poll_by_precinct.empty())
    throw std::runtime_error("compare_polls_to_votes: no polled precincts");

  ComparisonReport rep;
  double sum_official = 0.0, w_official_num = 0.0, w_den_all = 0.0;
  long n_all = 0;
  double sum_poll = 0.0, w_poll_num = 0.0;
  double restricted_num = 0.0, restricted_den = 0.0;

  for (const auto& p : d.precincts) {
    double votes = static_cast<double>(p.voters_showed_up());
    if (votes <= 0.0) continue;
    double official = static_cast<double>(p.yes_votes) / votes;
    sum_official += official;
    w_official_num += static_cast<double>(p.yes_votes);
    w_den_all += votes;
    ++n_all;

    auto it = poll_by_precinct.find(p.precinct_id);
    if (it == poll_by_precinct.end()) continue;
    double poll_share = static_cast<double>(it->second.first) /
                        static_cast<double>(it->second.second);
    sum_poll += poll_share;
    w_poll_num += poll_share * votes;
    restricted_num += static_cast<double>(p.yes_votes);
    restricted_den += votes;
    rep.per_precinct_pairs.emplace_back(official, poll_share);
    rep.polled_precinct_ids.push_back(p.precinct_id);
  }

  rep.n_polled = static_cast<long>(rep.per_precinct_pairs.size());
  if (rep.n_polled == 0)
    throw std::runtime_error("compare_polls_to_votes: no polled precincts");
  rep.unweighted_official_yes_share = sum_official / static_cast<double>(n_all);
  rep.weighted_official_yes_share = w_official_num / w_den_all;
  rep.unweighted_poll_yes_share = sum_poll / static_cast<double>(rep.n_polled);
  rep.weighted_poll_yes_share = w_poll_num / restricted_den;
  rep.restricted_official_share = restricted_num / restricted_den;
  return rep;
}

// Write a Dataset back out in the same CSV schemas load_dataset reads.
inline void write_dataset(const Dataset& d, const std::string& dir) {
  {
    csv::Writer w(dir + "/machines.csv");
    w.row({"machine_id", "precinct_id", "yes_votes", "no_votes", "registered_voters"});
    for (const auto& m : d.machines)
      w.row({m.machine_id, m.precinct_id, std::to_string(m.yes_votes),
             std::to_string(m.no_votes), std::to_string(m.registered_voters)});
  }
  {
    csv::Writer w(dir + "/precincts.csv");
    w.row({"precinct_id", "yes_votes", "signatures", "registered_at_reafirmazo",
           "new_voters", "non_voters"});
    for (const auto& p : d.precincts)
      w.row({p.precinct_id, std::to_string(p.yes_votes), std::to_string(p.signatures),
             std::to_string(p.registered_at_reafirmazo), std::to_string(p.new_voters),
             std::to_string(p.non_voters)});
  }
  if (!d.polls.empty()) {
    csv::Writer w(dir + "/polls.csv");
    w.row({"precinct_id", "poll_yes", "poll_total", "pollster"});
    for (const auto& r : d.polls) {
      std::string who = r.pollster == Pollster::sumate ? "sumate"
                        : r.pollster == Pollster::primero_justicia
                            ? "primero_justicia"
                            : "merged";
      w.row({r.precinct_id, std::to_string(r.poll_yes), std::to_string(r.poll_total), who});
    }
  }
  {
    csv::Writer w(dir + "/audit.csv");
    w.row({"precinct_id"});
    for (const auto& p : d.precincts)
      if (p.audited) w.row({p.precinct_id});
  }
}

}  // namespace forensics
