#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "forensics/ingest.hpp"

using namespace forensics;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("forensics_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) const {
    auto p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

}  // namespace

TEST_CASE("load joins machines, precincts, polls and audit flags") {
  TempDir dir;
  auto precincts = dir.file("precincts.csv",
                            "precinct_id,yes_votes,signatures,registered_at_reafirmazo,new_voters,non_voters\n"
                            "P1,40,80,90,30,20\n"
                            "P2,150,200,350,50,100\n");
  auto machines = dir.file("machines.csv",
                           "machine_id,precinct_id,yes_votes,no_votes,registered_voters\n"
                           "M1,P1,40,60,120\n"
                           "M2,P2,150,150,400\n");
  auto polls = dir.file("polls.csv",
                        "precinct_id,poll_yes,poll_total,pollster\n"
                        "P1,10,20,sumate\n");
  auto audit = dir.file("audit.csv", "precinct_id\nP2\n");

  auto res = load_dataset(machines, precincts, polls, audit);
  CHECK(res.join_failures.empty());
  CHECK(res.validation.ok());
  REQUIRE(res.dataset.precincts.size() == 2);
  const auto& p1 = res.dataset.precincts[0];
  CHECK(p1.voters_showed_up() == 100);
  // poll share 0.5 scaled to the 100 voters who showed up
  REQUIRE(p1.exit_poll_yes.has_value());
  CHECK(*p1.exit_poll_yes == 50);
  CHECK_FALSE(p1.audited);
  CHECK(res.dataset.precincts[1].audited);
}

TEST_CASE("blank precinct tallies are derived from machines") {
  TempDir dir;
  auto precincts = dir.file("precincts.csv",
                            "precinct_id,yes_votes,signatures,registered_at_reafirmazo,new_voters,non_voters\n"
                            "P1,,80,90,30,20\n");
  auto machines = dir.file("machines.csv",
                           "machine_id,precinct_id,yes_votes,no_votes,registered_voters\n"
                           "M1,P1,25,30,60\n"
                           "M2,P1,17,28,60\n");
  auto res = load_dataset(machines, precincts);
  CHECK(res.dataset.precincts[0].yes_votes == 42);
  CHECK(res.validation.ok());
}

TEST_CASE("rows that cannot be joined are accounted for, never dropped silently") {
  TempDir dir;
  auto precincts = dir.file("precincts.csv",
                            "precinct_id,yes_votes,signatures,registered_at_reafirmazo,new_voters,non_voters\n"
                            "P1,40,80,90,30,20\n"
                            "P1,41,80,90,30,20\n");
  auto machines = dir.file("machines.csv",
                           "machine_id,precinct_id,yes_votes,no_votes,registered_voters\n"
                           "M1,P1,40,60,120\n"
                           "M2,P9,10,10,40\n");
  auto polls = dir.file("polls.csv",
                        "precinct_id,poll_yes,poll_total,pollster\n"
                        "P9,1,2,merged\n"
                        "P1,30,20,merged\n");
  auto res = load_dataset(machines, precincts, polls);
  // duplicate precinct + unknown machine precinct + unknown poll precinct +
  // poll_yes > poll_total
  CHECK(res.join_failures.size() == 4);
  CHECK(res.dataset.precincts.size() == 1);
  CHECK(res.dataset.machines.size() == 1);
  CHECK(res.dataset.polls.empty());
}

TEST_CASE("missing columns and malformed numbers raise with location") {
  TempDir dir;
  auto bad_header = dir.file("p1.csv", "precinct_id,yes_votes\nP1,40\n");
  CHECK_THROWS_WITH(load_dataset("none.csv", bad_header),
                    Catch::Matchers::ContainsSubstring("missing column"));

  auto bad_number = dir.file("p2.csv",
                             "precinct_id,yes_votes,signatures,registered_at_reafirmazo,new_voters,non_voters\n"
                             "P1,40,eighty,90,30,20\n");
  CHECK_THROWS_WITH(load_dataset("none.csv", bad_number),
                    Catch::Matchers::ContainsSubstring(":2"));
}

TEST_CASE("poll comparison aggregates weighted and unweighted shares") {
  Dataset d;
  PrecinctRecord p1;
  p1.precinct_id = "P1";
  p1.yes_votes = 40;
  p1.signatures = 80;
  p1.registered_at_reafirmazo = 90;
  p1.new_voters = 30;
  p1.non_voters = 20;  // 100 showed
  PrecinctRecord p2 = p1;
  p2.precinct_id = "P2";
  p2.yes_votes = 150;
  p2.registered_at_reafirmazo = 350;
  p2.new_voters = 50;
  p2.non_voters = 100;  // 300 showed
  d.precincts = {p1, p2};
  d.polls.push_back({"P1", 10, 20, Pollster::sumate});

  auto rep = compare_polls_to_votes(d, Pollster::sumate);
  CHECK(rep.n_polled == 1);
  CHECK(rep.unweighted_official_yes_share == Catch::Approx(0.45));
  CHECK(rep.weighted_official_yes_share == Catch::Approx(190.0 / 400.0));
  CHECK(rep.unweighted_poll_yes_share == Catch::Approx(0.5));
  CHECK(rep.weighted_poll_yes_share == Catch::Approx(0.5));
  CHECK(rep.restricted_official_share == Catch::Approx(0.4));

  // filtering by the other pollster leaves nothing
  CHECK_THROWS(compare_polls_to_votes(d, Pollster::primero_justicia));
}

TEST_CASE("datasets round-trip through the CSV schemas") {
  Dataset d;
  PrecinctRecord p;
  p.precinct_id = "P1";
  p.yes_votes = 40;
  p.signatures = 80;
  p.registered_at_reafirmazo = 90;
  p.new_voters = 30;
  p.non_voters = 20;
  p.turnout = 1.0 - 20.0 / 120.0;
  p.audited = true;
  d.precincts.push_back(p);
  d.machines.push_back({"M1", "P1", 40, 60, 120});
  d.polls.push_back({"P1", 10, 20, Pollster::merged});

  TempDir dir;
  write_dataset(d, dir.path.string());
  auto res = load_dataset((dir.path / "machines.csv").string(),
                          (dir.path / "precincts.csv").string(),
                          (dir.path / "polls.csv").string(),
                          (dir.path / "audit.csv").string());
  REQUIRE(res.dataset.precincts.size() == 1);
  const auto& q = res.dataset.precincts[0];
  CHECK(q.yes_votes == p.yes_votes);
  CHECK(q.signatures == p.signatures);
  CHECK(q.registered_at_reafirmazo == p.registered_at_reafirmazo);
  CHECK(q.new_voters == p.new_voters);
  CHECK(q.non_voters == p.non_voters);
  CHECK(q.audited);
  REQUIRE(res.dataset.machines.size() == 1);
  CHECK(res.dataset.machines[0].yes_votes == 40);
  REQUIRE(res.dataset.polls.size() == 1);
  CHECK(res.dataset.polls[0].poll_total == 20);
}
