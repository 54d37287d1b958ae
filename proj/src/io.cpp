// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include "ibp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace ibp::io {

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

//----------------------------------------------------------------------------
// ProcessSpec

json to_json(const ProcessSpec& spec) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"kind", std::string(to_string(spec.kind))},
          {"beta", opt(spec.beta)},
          {"r", opt(spec.r)},
          {"gamma", opt(spec.gamma)}};
}

ProcessSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw SchemaMismatch("process spec needs a string \"kind\"");
  ProcessSpec s;
  s.kind = parse_process_kind(j["kind"].get<std::string>());
  auto read = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number()) throw SchemaMismatch(std::string("process spec field \"") + key + "\" must be a number");
    return j[key].get<double>();
  };
  s.beta = read("beta");
  s.r = read("r");
  s.gamma = read("gamma");
  return s;
}

//----------------------------------------------------------------------------
// Snapshot tables

void write_csv(std::ostream& os, const SnapshotTable& t) {
  const bool two = t.two_type();
  const bool mc = t.monte_carlo();
  os << kSnapshotHeader << '\n';
  os << (two ? "time,m,n,probability,tail_mass,engine" : "time,m,probability,tail_mass,engine")
     << (mc ? ",stderr,trajectories" : "") << '\n';
  for (std::size_t i = 0; i < t.snapshots.size(); ++i) {
    const auto& s = t.snapshots[i];
    const std::string time = format_double(s.time);
    const std::string tail = format_double(s.tail_mass);
    const std::string engine(to_string(s.engine));
    for (std::size_t e = 0; e < s.probs.size(); ++e) {
      os << time << ',';
      if (two)
        os << e / s.cols << ',' << e % s.cols << ',';
      else
        os << s.origin + static_cast<long>(e) << ',';
      os << format_double(s.probs[e]) << ',' << tail << ',' << engine;
      if (mc) os << ',' << format_double(t.stderrs.at(i).at(e)) << ',' << t.trajectories;
      os << '\n';
    }
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaMismatch("line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

long parse_long(const std::string& s, std::size_t line) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw SchemaMismatch("line " + std::to_string(line) + ": not an integer: '" + s + "'");
  return v;
}

struct Row {
  long m = 0, n = 0;
  double p = 0.0, se = 0.0;
};

struct Group {
  double time = 0.0;
  double tail = 0.0;
  Engine engine = Engine::ClosedForm;
  std::vector<Row> rows;
};

}  // namespace

SnapshotTable read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSnapshotHeader)
    throw SchemaMismatch(std::string("missing '") + kSnapshotHeader + "' header");
  if (!std::getline(is, line)) throw SchemaMismatch("missing column line");
  const auto cols = split(line);
  static const std::vector<std::string> one{"time", "m", "probability", "tail_mass", "engine"};
  static const std::vector<std::string> two{"time", "m", "n", "probability", "tail_mass", "engine"};
  bool is_two = false, is_mc = false;
  auto starts_with = [&](const std::vector<std::string>& base) {
    return cols.size() >= base.size() && std::equal(base.begin(), base.end(), cols.begin());
  };
  if (starts_with(two))
    is_two = true;
  else if (!starts_with(one))
    throw SchemaMismatch("unrecognized columns: " + line);
  const std::size_t base = is_two ? two.size() : one.size();
  if (cols.size() == base + 2 && cols[base] == "stderr" && cols[base + 1] == "trajectories")
    is_mc = true;
  else if (cols.size() != base)
    throw SchemaMismatch("unrecognized columns: " + line);

  SnapshotTable t;
  std::vector<Group> groups;
  std::size_t lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != cols.size()) throw SchemaMismatch("line " + std::to_string(lineno) + ": wrong field count");
    std::size_t c = 0;
    const double time = parse_double(f[c++], lineno);
    Row r;
    r.m = parse_long(f[c++], lineno);
    if (is_two) r.n = parse_long(f[c++], lineno);
    r.p = parse_double(f[c++], lineno);
    const double tail = parse_double(f[c++], lineno);
    Engine engine;
    try {
      engine = parse_engine(f[c++]);
    } catch (const Error&) {
      throw SchemaMismatch("line " + std::to_string(lineno) + ": unknown engine");
    }
    if (is_mc) {
      r.se = parse_double(f[c++], lineno);
      const auto traj = static_cast<std::uint64_t>(parse_long(f[c++], lineno));
      if (t.trajectories != 0 && t.trajectories != traj)
        throw SchemaMismatch("inconsistent trajectory counts");
      t.trajectories = traj;
    }
    if (groups.empty() || groups.back().time != time) groups.push_back({time, tail, engine, {}});
    groups.back().rows.push_back(r);
  }

  for (const auto& g : groups) {
    DistributionSnapshot s;
    s.time = g.time;
    s.tail_mass = g.tail;
    s.engine = g.engine;
    std::vector<double> se;
    if (is_two) {
      long rmax = 0, cmax = 0;
      for (const auto& r : g.rows) {
        rmax = std::max(rmax, r.m);
        cmax = std::max(cmax, r.n);
      }
      s.origin = 0;
      s.rows = static_cast<std::size_t>(rmax + 1);
      s.cols = static_cast<std::size_t>(cmax + 1);
      s.probs.assign(s.rows * s.cols, 0.0);
      se.assign(s.probs.size(), 0.0);
      for (const auto& r : g.rows) {
        if (r.m < 0 || r.n < 0) throw SchemaMismatch("negative index");
        const auto e = static_cast<std::size_t>(r.m) * s.cols + static_cast<std::size_t>(r.n);
        s.probs[e] = r.p;
        se[e] = r.se;
      }
    } else {
      long lo = g.rows.front().m, hi = lo;
      for (const auto& r : g.rows) {
        lo = std::min(lo, r.m);
        hi = std::max(hi, r.m);
      }
      s.origin = static_cast<int>(lo);
      s.probs.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
      se.assign(s.probs.size(), 0.0);
      for (const auto& r : g.rows) {
        s.probs[static_cast<std::size_t>(r.m - lo)] = r.p;
        se[static_cast<std::size_t>(r.m - lo)] = r.se;
      }
    }
    t.snapshots.push_back(std::move(s));
    if (is_mc) t.stderrs.push_back(std::move(se));
  }
  return t;
}

json to_json(const SnapshotTable& t) {
  json snaps = json::array();
  for (std::size_t i = 0; i < t.snapshots.size(); ++i) {
    const auto& s = t.snapshots[i];
    json j = {{"time", s.time},
              {"engine", std::string(to_string(s.engine))},
              {"origin", s.origin},
              {"rows", s.rows},
              {"cols", s.cols},
              {"probs", s.probs},
              {"tail_mass", s.tail_mass},
              {"absorbed_mass", s.absorbed_mass},
              {"clamped_mass", s.clamped_mass},
              {"tolerance", s.tolerance}};
    if (t.monte_carlo()) j["stderr"] = t.stderrs.at(i);
    snaps.push_back(std::move(j));
  }
  json out = {{"schema", "ibp-snapshot v1"}, {"snapshots", std::move(snaps)}};
  if (t.monte_carlo()) out["trajectories"] = t.trajectories;
  return out;
}

SnapshotTable table_from_json(const json& j) {
  try {
    if (j.value("schema", "") != "ibp-snapshot v1") throw SchemaMismatch("missing ibp-snapshot v1 schema tag");
    SnapshotTable t;
    t.trajectories = j.value("trajectories", std::uint64_t{0});
    for (const auto& x : j.at("snapshots")) {
      DistributionSnapshot s;
      s.time = x.at("time").get<double>();
      s.engine = parse_engine(x.at("engine").get<std::string>());
      s.origin = x.at("origin").get<int>();
      s.rows = x.at("rows").get<std::size_t>();
      s.cols = x.at("cols").get<std::size_t>();
      s.probs = x.at("probs").get<std::vector<double>>();
      s.tail_mass = x.at("tail_mass").get<double>();
      s.absorbed_mass = x.value("absorbed_mass", 0.0);
      s.clamped_mass = x.value("clamped_mass", 0.0);
      s.tolerance = x.value("tolerance", 0.0);
      if (s.two_type() && s.rows * s.cols != s.probs.size()) throw SchemaMismatch("grid shape does not match probs");
      if (t.monte_carlo()) t.stderrs.push_back(x.at("stderr").get<std::vector<double>>());
      t.snapshots.push_back(std::move(s));
    }
    return t;
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("snapshot JSON: ") + e.what());
  }
}

//----------------------------------------------------------------------------
// Ensemble statistics

namespace {

json moments_json(const std::vector<std::vector<mc::MomentEstimate>>& per_time) {
  json out = json::array();
  for (const auto& row : per_time) {
    json r = json::array();
    for (const auto& m : row) r.push_back({{"k", m.k}, {"value", m.value}, {"stderr", m.std_error}});
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<mc::MomentEstimate>> moments_from(const json& j) {
  std::vector<std::vector<mc::MomentEstimate>> out;
  for (const auto& row : j) {
    std::vector<mc::MomentEstimate> r;
    for (const auto& m : row)
      r.push_back({m.at("k").get<int>(), m.at("value").get<double>(), m.at("stderr").get<double>()});
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

json to_json(const mc::EnsembleStats& s) {
  json out = {{"spec", to_json(s.spec)},
              {"base_seed", s.base_seed},
              {"trajectories", s.trajectories},
              {"sample_times", s.sample_times},
              {"rows", s.rows},
              {"cols", s.cols},
              {"histograms", s.histograms},
              {"overflow", s.overflow},
              {"moments", moments_json(s.moments)}};
  if (s.two_type()) out["moments_n"] = moments_json(s.moments_n);
  return out;
}

mc::EnsembleStats ensemble_from_json(const json& j) {
  try {
    mc::EnsembleStats s;
    s.spec = spec_from_json(j.at("spec"));
    s.base_seed = j.at("base_seed").get<std::uint64_t>();
    s.trajectories = j.at("trajectories").get<std::uint64_t>();
    s.sample_times = j.at("sample_times").get<std::vector<double>>();
    s.rows = j.at("rows").get<std::size_t>();
    s.cols = j.at("cols").get<std::size_t>();
    s.histograms = j.at("histograms").get<std::vector<std::vector<std::uint64_t>>>();
    s.overflow = j.at("overflow").get<std::vector<std::uint64_t>>();
    s.moments = moments_from(j.at("moments"));
    if (j.contains("moments_n")) s.moments_n = moments_from(j.at("moments_n"));
    return s;
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("ensemble JSON: ") + e.what());
  }
}

SnapshotTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaMismatch("cannot open " + path.string());
  const int first = in.peek();
  if (first == '{') {
    try {
      return table_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw SchemaMismatch(path.string() + ": " + e.what());
    }
  }
  return read_csv(in);
}

}  // namespace ibp::io
