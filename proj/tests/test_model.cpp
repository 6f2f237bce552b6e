#include <catch2/catch_amalgamated.hpp>

#include "forensics/model.hpp"

using namespace forensics;

namespace {

PrecinctRecord make_precinct(const std::string& id, count_t yes, count_t reg,
                             count_t newv, count_t nonv) {
  PrecinctRecord p;
  p.precinct_id = id;
  p.yes_votes = yes;
  p.signatures = 100;
  p.registered_at_reafirmazo = reg;
  p.new_voters = newv;
  p.non_voters = nonv;
  p.turnout = 1.0 - static_cast<double>(nonv) / static_cast<double>(reg + newv);
  return p;
}

MachineRecord make_machine(const std::string& mid, const std::string& pid,
                           count_t yes, count_t no, count_t reg) {
  return MachineRecord{mid, pid, yes, no, reg};
}

bool has_violation(const ValidationReport& r, const std::string& record,
                   const std::string& rule) {
  for (const auto& v : r.violations)
    if (v.record == record && v.rule == rule) return true;
  return false;
}

}  // namespace

TEST_CASE("clean dataset validates") {
  Dataset d;
  d.precincts.push_back(make_precinct("P1", 90, 200, 50, 100));
  d.machines.push_back(make_machine("M1", "P1", 40, 30, 130));
  d.machines.push_back(make_machine("M2", "P1", 50, 30, 120));
  auto rep = validate_dataset(d);
  CHECK(rep.ok());
  CHECK(rep.notes.empty());
}

TEST_CASE("yes votes above the electorate are flagged") {
  Dataset d;
  d.precincts.push_back(make_precinct("P1", 300, 200, 50, 100));
  auto rep = validate_dataset(d);
  CHECK(has_violation(rep, "P1", "yes votes exceed electorate"));
}

TEST_CASE("turnout must match non_voters") {
  Dataset d;
  auto p = make_precinct("P1", 90, 200, 50, 100);
  p.turnout = 0.5;  // true value is 0.6
  d.precincts.push_back(p);
  auto rep = validate_dataset(d);
  CHECK(has_violation(rep, "P1", "turnout inconsistent with non_voters"));
}

TEST_CASE("turnout outside the unit interval is flagged") {
  Dataset d;
  auto p = make_precinct("P1", 90, 200, 50, 100);
  p.turnout = -0.2;
  d.precincts.push_back(p);
  auto rep = validate_dataset(d);
  CHECK(has_violation(rep, "P1", "turnout outside [0,1]"));
}

TEST_CASE("duplicate precinct ids are flagged") {
  Dataset d;
  d.precincts.push_back(make_precinct("P1", 90, 200, 50, 100));
  d.precincts.push_back(make_precinct("P1", 80, 200, 50, 100));
  auto rep = validate_dataset(d);
  CHECK(has_violation(rep, "P1", "duplicate precinct_id"));
}

TEST_CASE("machine tallies above registered are flagged") {
  Dataset d;
  d.precincts.push_back(make_precinct("P1", 90, 200, 50, 100));
  d.machines.push_back(make_machine("M1", "P1", 90, 60, 130));
  auto rep = validate_dataset(d);
  CHECK(has_violation(rep, "M1", "tallies exceed registered"));
}

TEST_CASE("duplicate machine ids within a precinct are flagged") {
  Dataset d;
  d.precincts.push_back(make_precinct("P1", 90, 200, 50, 100));
  d.machines.push_back(make_machine("M1", "P1", 40, 30, 130));
  d.machines.push_back(make_machine("M1", "P1", 50, 30, 120));
  auto rep = validate_dataset(d);
  CHECK(has_violation(rep, "M1", "duplicate machine_id within precinct"));
}

TEST_CASE("machines referencing unknown precincts are flagged") {
  Dataset d;
  d.precincts.push_back(make_precinct("P1", 90, 200, 50, 100));
  d.machines.push_back(make_machine("M1", "P9", 40, 30, 130));
  auto rep = validate_dataset(d);
  CHECK(has_violation(rep, "M1", "unknown precinct_id"));
}

TEST_CASE("machine totals must sum to the precinct tally") {
  Dataset d;
  d.precincts.push_back(make_precinct("P1", 90, 200, 50, 100));
  d.machines.push_back(make_machine("M1", "P1", 40, 30, 130));
  d.machines.push_back(make_machine("M2", "P1", 40, 30, 120));
  auto rep = validate_dataset(d);
  CHECK(has_violation(rep, "P1", "machine yes totals disagree with precinct"));
}

TEST_CASE("single-machine precincts get a note, not a violation") {
  Dataset d;
  d.precincts.push_back(make_precinct("P1", 40, 200, 50, 100));
  d.machines.push_back(make_machine("M1", "P1", 40, 30, 250));
  auto rep = validate_dataset(d);
  CHECK(rep.ok());
  REQUIRE(rep.notes.size() == 1);
  CHECK(rep.notes[0].rule == "dispersion-inapplicable");
}

TEST_CASE("validation output is sorted and order-independent") {
  Dataset a, b;
  a.precincts.push_back(make_precinct("P2", 900, 200, 50, 100));
  a.precincts.push_back(make_precinct("P1", 900, 200, 50, 100));
  b.precincts.push_back(make_precinct("P1", 900, 200, 50, 100));
  b.precincts.push_back(make_precinct("P2", 900, 200, 50, 100));
  auto ra = validate_dataset(a);
  auto rb = validate_dataset(b);
  REQUIRE(ra.violations.size() == rb.violations.size());
  for (std::size_t i = 0; i < ra.violations.size(); ++i)
    CHECK(ra.violations[i] == rb.violations[i]);
}

TEST_CASE("derived precinct quantities") {
  auto p = make_precinct("P1", 90, 200, 50, 100);
  CHECK(p.electorate() == 250);
  CHECK(p.voters_showed_up() == 150);
  MachineRecord m{"M1", "P1", 40, 30, 130};
  CHECK(m.votes_cast() == 70);
}
