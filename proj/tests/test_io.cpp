// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ibp/exact.hpp"
#include "ibp/io.hpp"
#include "ibp/mastereq.hpp"
#include "ibp/mc.hpp"

using namespace ibp;

namespace {

void same_snapshot(const DistributionSnapshot& a, const DistributionSnapshot& b) {
  CHECK(a.time == b.time);
  CHECK(a.engine == b.engine);
  CHECK(a.origin == b.origin);
  CHECK(a.rows == b.rows);
  CHECK(a.cols == b.cols);
  CHECK(a.tail_mass == b.tail_mass);
  REQUIRE(a.probs.size() == b.probs.size());
  for (std::size_t i = 0; i < a.probs.size(); ++i) CHECK(a.probs[i] == b.probs[i]);
}

io::SnapshotTable roundtrip_csv(const io::SnapshotTable& t) {
  std::stringstream ss;
  io::write_csv(ss, t);
  return io::read_csv(ss);
}

io::SnapshotTable critical_table() {
  io::SnapshotTable t;
  for (double time : {0.5, 1.0, 3.0}) t.snapshots.push_back(exact::critical_snapshot(time, 40));
  return t;
}

io::SnapshotTable twotype_table() {
  const ProcessSpec s = ProcessSpec::two_type(0.3, 2.0, 0.5);
  mastereq::TruncationPolicy p;
  p.M = 12;
  io::SnapshotTable t;
  t.snapshots = mastereq::integrate(s, std::vector<double>{0.5, 1.0}, p);
  return t;
}

}  // namespace

TEST_CASE("format_double round-trips every double") {
  for (double v : {0.1, 1.0 / 3.0, 4.0 / 81.0, 1e-300, 5e-324, 1.7976931348623157e308, -2.5, 0.0}) {
    CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("spec JSON round trip") {
  for (const auto& s : {ProcessSpec::critical(), ProcessSpec::no_extinction(), ProcessSpec::immigration(1.5),
                        ProcessSpec::two_type(0.25, 1.0, 0.5)}) {
    const auto back = io::spec_from_json(io::to_json(s));
    CHECK(back.kind == s.kind);
    CHECK(back.beta == s.beta);
    CHECK(back.r == s.r);
    CHECK(back.gamma == s.gamma);
  }
  CHECK(io::to_json(ProcessSpec::critical())["beta"].is_null());
  CHECK_THROWS_AS(io::spec_from_json(io::json{{"kind", "Mystery"}}), InvalidSpec);
  CHECK_THROWS_AS(io::spec_from_json(io::json{{"kind", "Immigration"}, {"beta", "fast"}}), SchemaMismatch);
}

TEST_CASE("one-type CSV round trip is exact") {
  const auto t = critical_table();
  const auto back = roundtrip_csv(t);
  REQUIRE(back.snapshots.size() == t.snapshots.size());
  CHECK_FALSE(back.monte_carlo());
  for (std::size_t i = 0; i < t.snapshots.size(); ++i) same_snapshot(t.snapshots[i], back.snapshots[i]);
}

TEST_CASE("CSV header and column order are stable") {
  std::stringstream ss;
  io::write_csv(ss, critical_table());
  std::string line;
  std::getline(ss, line);
  CHECK(line == io::kSnapshotHeader);
  std::getline(ss, line);
  CHECK(line == "time,m,probability,tail_mass,engine");
  std::getline(ss, line);
  CHECK(line.rfind("0.5,1,", 0) == 0);

  std::stringstream s2;
  io::write_csv(s2, twotype_table());
  std::getline(s2, line);
  std::getline(s2, line);
  CHECK(line == "time,m,n,probability,tail_mass,engine");
}

TEST_CASE("two-type CSV round trip is exact") {
  const auto t = twotype_table();
  const auto back = roundtrip_csv(t);
  REQUIRE(back.two_type());
  REQUIRE(back.snapshots.size() == t.snapshots.size());
  for (std::size_t i = 0; i < t.snapshots.size(); ++i) same_snapshot(t.snapshots[i], back.snapshots[i]);
}

TEST_CASE("Monte Carlo columns survive CSV and JSON") {
  mc::EnsembleOptions o;
  o.trajectories = 2000;
  o.base_seed = 11;
  o.bin_cap = 64;
  const auto st = mc::run_ensemble(ProcessSpec::critical(), 1.0, std::vector<double>{0.5, 1.0}, o);
  io::SnapshotTable t;
  t.trajectories = st.trajectories;
  for (std::size_t i = 0; i < 2; ++i) {
    t.snapshots.push_back(st.snapshot(i));
    t.stderrs.push_back(st.snapshot_stderr(i));
  }
  for (const auto& back : {roundtrip_csv(t), io::table_from_json(io::to_json(t))}) {
    CHECK(back.trajectories == 2000);
    REQUIRE(back.stderrs.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      same_snapshot(t.snapshots[i], back.snapshots[i]);
      CHECK(back.stderrs[i] == t.stderrs[i]);
    }
  }
}

TEST_CASE("snapshot table JSON round trip") {
  for (const auto& t : {critical_table(), twotype_table()}) {
    const auto j = io::to_json(t);
    CHECK(j["schema"] == "ibp-snapshot v1");
    const auto back = io::table_from_json(io::json::parse(j.dump()));
    REQUIRE(back.snapshots.size() == t.snapshots.size());
    for (std::size_t i = 0; i < t.snapshots.size(); ++i) same_snapshot(t.snapshots[i], back.snapshots[i]);
  }
}

TEST_CASE("EnsembleStats JSON round trip is exact") {
  mc::EnsembleOptions o;
  o.trajectories = 3000;
  o.base_seed = 5;
  o.bin_cap = 16;
  const auto st = mc::run_ensemble(ProcessSpec::two_type(0.25, 1.0, 0.5), 1.0, std::vector<double>{0.5, 1.0}, o);
  const auto dumped = io::to_json(st).dump();
  const auto back = io::ensemble_from_json(io::json::parse(dumped));
  CHECK(back.base_seed == st.base_seed);
  CHECK(back.trajectories == st.trajectories);
  CHECK(back.sample_times == st.sample_times);
  CHECK(back.rows == st.rows);
  CHECK(back.cols == st.cols);
  CHECK(back.histograms == st.histograms);
  CHECK(back.overflow == st.overflow);
  REQUIRE(back.moments.size() == st.moments.size());
  for (std::size_t i = 0; i < st.moments.size(); ++i)
    for (std::size_t k = 0; k < st.moments[i].size(); ++k) {
      CHECK(back.moments[i][k].value == st.moments[i][k].value);
      CHECK(back.moments[i][k].std_error == st.moments[i][k].std_error);
      CHECK(back.moments_n[i][k].value == st.moments_n[i][k].value);
    }
  CHECK(io::to_json(back).dump() == dumped);
}

TEST_CASE("malformed CSV is a SchemaMismatch") {
  auto parse = [](const std::string& text) {
    std::stringstream ss(text);
    return io::read_csv(ss);
  };
  CHECK_THROWS_AS(parse("time,m,probability,tail_mass,engine\n1,1,0.25,0,ClosedForm\n"), SchemaMismatch);
  CHECK_THROWS_AS(parse("# ibp-snapshot v1\ntime,m,prob,tail_mass,engine\n"), SchemaMismatch);
  CHECK_THROWS_AS(parse("# ibp-snapshot v1\ntime,m,probability,tail_mass,engine\n1,x,0.25,0,ClosedForm\n"),
                  SchemaMismatch);
  CHECK_THROWS_AS(parse("# ibp-snapshot v1\ntime,m,probability,tail_mass,engine\n1,1,0.25\n"), SchemaMismatch);
}

TEST_CASE("load_table detects the format") {
  const auto dir = std::filesystem::temp_directory_path() / "ibp_test_io";
  std::filesystem::create_directories(dir);
  const auto t = critical_table();
  {
    std::ofstream f(dir / "a.csv");
    io::write_csv(f, t);
    std::ofstream g(dir / "a.json");
    g << io::to_json(t).dump(1);
  }
  for (const char* name : {"a.csv", "a.json"}) {
    const auto back = io::load_table(dir / name);
    REQUIRE(back.snapshots.size() == t.snapshots.size());
    same_snapshot(t.snapshots[2], back.snapshots[2]);
  }
  std::filesystem::remove_all(dir);
}
