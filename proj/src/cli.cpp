// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include "ibp/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <tuple>

#include "ibp/characteristics.hpp"
#include "ibp/exact.hpp"
#include "ibp/io.hpp"
#include "ibp/lapinv.hpp"
#include "ibp/mastereq.hpp"
#include "ibp/mc.hpp"

namespace ibp::cli {

using io::json;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw ResourceError("SHA-256 unavailable");
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

namespace {

// Bad flag values detected after parsing; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Options shared by the engine commands.
struct Common {
  std::string process = "critical";
  std::optional<double> beta, r, gamma;
  std::vector<double> times;
  std::optional<double> tmax;
  std::string out;
  std::string manifest;
  std::string format = "csv";
  unsigned jobs = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--process", c.process, "critical | noext | immigration | twotype")
      ->check(CLI::IsMember({"critical", "noext", "immigration", "twotype"}));
  sub->add_option("--beta", c.beta, "source rate");
  sub->add_option("--r", c.r, "two-type symmetric division rate");
  sub->add_option("--gamma", c.gamma, "post-mitotic removal rate");
  sub->add_option("--times", c.times, "comma-separated sample times")->delimiter(',');
  sub->add_option("--tmax", c.tmax, "final time (default: last sample time)");
  sub->add_option("--out", c.out, "output file (default: stdout)");
  sub->add_option("--manifest", c.manifest, "manifest path (default: <out>.manifest.json)");
  sub->add_option("--format", c.format)->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

ProcessSpec resolve_spec(const Common& c) {
  ProcessSpec s{parse_process_kind(c.process), c.beta, c.r, c.gamma};
  if (s.kind == ProcessKind::Critical || s.kind == ProcessKind::NoExtinction) {
    if (c.beta || c.r || c.gamma) throw UsageError(c.process + " takes no rate parameters");
  } else if (s.kind == ProcessKind::Immigration && (c.r || c.gamma)) {
    throw UsageError("immigration takes only --beta");
  }
  require_valid(s);
  return s;
}

std::vector<double> resolve_times(const Common& c) {
  std::vector<double> t = c.times;
  if (t.empty() && c.tmax) t.push_back(*c.tmax);
  if (t.empty()) throw UsageError("give --times or --tmax");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0) || !std::isfinite(t[i])) throw UsageError("times must be finite and >= 0");
    if (i > 0 && !(t[i] > t[i - 1])) throw UsageError("times must be strictly increasing");
  }
  if (c.tmax && *c.tmax < t.back()) throw UsageError("--tmax is earlier than the last sample time");
  return t;
}

// Collects output, writes it to --out or the stream, and records the
// manifest.
struct Emitter {
  const Common& c;
  std::ostream& out;
  std::vector<std::string> argv;
  json parameters = json::object();
  std::optional<std::uint64_t> seed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void emit(const std::string& content) const {
    if (c.out.empty()) {
      out << content;
      return;
    }
    {
      std::ofstream f(c.out, std::ios::binary);
      if (!f) throw ResourceError("cannot write " + c.out);
      f << content;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json m = {{"command_line", argv},
              {"parameters", parameters},
              {"seed", seed ? json(*seed) : json(nullptr)},
              {"engine_versions", {{"ibp", kVersion}, {"fftw", characteristics::fft_backend_version()}}},
              {"outputs", json::array({{{"path", c.out}, {"sha256", sha256_file(c.out)}}})},
              {"wall_clock_seconds", wall}};
    const std::string path = c.manifest.empty() ? c.out + ".manifest.json" : c.manifest;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ResourceError("cannot write " + path);
    f << m.dump(2) << '\n';
  }
};

json base_parameters(const Common& c, const ProcessSpec& spec, const std::vector<double>& times) {
  return {{"spec", io::to_json(spec)}, {"times", times}, {"format", c.format}, {"jobs", c.jobs}};
}

std::string render(const Common& c, const ProcessSpec& spec, const io::SnapshotTable& t) {
  if (c.format == "json") {
    json j = io::to_json(t);
    j["spec"] = io::to_json(spec);
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  io::write_csv(os, t);
  return os.str();
}

double one_minus_sum(const DistributionSnapshot& s) { return std::max(0.0, 1.0 - s.total()); }

//----------------------------------------------------------------------------
// Engine commands

struct ExactOpts {
  long mmax = 100;
  std::string marginal = "m";
};

int cmd_exact(const Common& c, const ExactOpts& o, Emitter& em) {
  const auto spec = resolve_spec(c);
  const auto times = resolve_times(c);
  if (o.mmax < 1) throw UsageError("--mmax must be >= 1");
  io::SnapshotTable t;
  for (double time : times) {
    switch (spec.kind) {
      case ProcessKind::Critical:
        t.snapshots.push_back(exact::critical_snapshot(time, o.mmax));
        break;
      case ProcessKind::Immigration:
        t.snapshots.push_back(exact::immigration_snapshot(time, *spec.beta, o.mmax));
        break;
      case ProcessKind::NoExtinction:
        throw UsageError("no exact distribution is known for noext; use laplace, ode or scaling");
      case ProcessKind::TwoTypeSource: {
        if (*spec.r != 0.25 || *spec.gamma != 1.0)
          throw UsageError("two-type closed forms need --r 0.25 --gamma 1; use gf or ode otherwise");
        DistributionSnapshot s;
        s.time = time;
        s.engine = Engine::ClosedForm;
        s.origin = 0;
        for (long k = 0; k < o.mmax; ++k)
          s.probs.push_back(o.marginal == "m" ? exact::twotype_special_pm(k, time, *spec.beta)
                                              : exact::twotype_special_pin(k, time, *spec.beta));
        s.tail_mass = one_minus_sum(s);
        t.snapshots.push_back(std::move(s));
        break;
      }
    }
  }
  em.parameters = base_parameters(c, spec, times);
  em.parameters["mmax"] = o.mmax;
  if (spec.is_two_type()) em.parameters["marginal"] = o.marginal;
  em.emit(render(c, spec, t));
  return kOk;
}

struct OdeOpts {
  long truncation = 0;
  long truncation_n = 0;
  double tail_tol = 1e-10;
  bool adaptive = false;
  long mmax = 0;
  long nmax = 0;
  std::string integrator = "auto";
};

int cmd_ode(const Common& c, const OdeOpts& o, Emitter& em) {
  const auto spec = resolve_spec(c);
  const auto times = resolve_times(c);
  mastereq::TruncationPolicy p;
  p.M = o.truncation > 0 ? o.truncation : (spec.is_two_type() ? 64 : 1000);
  p.M_n = o.truncation_n;
  p.tail_tolerance = o.tail_tol;
  p.strategy = o.adaptive ? mastereq::Strategy::AdaptiveGrow : mastereq::Strategy::Fixed;
  p.integrator = o.integrator == "rk45"     ? mastereq::Integrator::ExplicitRK45
                 : o.integrator == "sdirk4" ? mastereq::Integrator::ImplicitSDIRK4
                                            : mastereq::Integrator::Auto;
  mastereq::validate(p);
  io::SnapshotTable t;
  t.snapshots = mastereq::integrate(spec, times, p);
  for (auto& s : t.snapshots) {
    if (s.two_type()) {
      const std::size_t rows = o.mmax > 0 ? std::min<std::size_t>(s.rows, static_cast<std::size_t>(o.mmax)) : s.rows;
      const std::size_t cols = o.nmax > 0 ? std::min<std::size_t>(s.cols, static_cast<std::size_t>(o.nmax)) : s.cols;
      std::vector<double> g(rows * cols);
      for (std::size_t m = 0; m < rows; ++m)
        for (std::size_t n = 0; n < cols; ++n) g[m * cols + n] = s.at(m, n);
      s.probs = std::move(g);
      s.rows = rows;
      s.cols = cols;
    } else if (o.mmax > 0 && s.max_index() > o.mmax) {
      s.probs.resize(static_cast<std::size_t>(o.mmax - s.origin + 1));
    }
  }
  em.parameters = base_parameters(c, spec, times);
  em.parameters.update({{"truncation", p.M},
                        {"truncation_n", p.M_n},
                        {"tail_tol", p.tail_tolerance},
                        {"adaptive", o.adaptive},
                        {"integrator", o.integrator},
                        {"mmax", o.mmax},
                        {"nmax", o.nmax}});
  em.emit(render(c, spec, t));
  return kOk;
}

struct McOpts {
  std::uint64_t trajectories = 100'000;
  std::optional<std::uint64_t> seed;
  long bins = 0;
  int kmax = 4;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("IBP_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("IBP_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

int cmd_mc(const Common& c, const McOpts& o, Emitter& em) {
  const auto spec = resolve_spec(c);
  const auto times = resolve_times(c);
  mc::EnsembleOptions eo;
  eo.trajectories = o.trajectories;
  eo.base_seed = o.seed ? *o.seed : default_seed();
  eo.jobs = c.jobs;
  eo.bin_cap = o.bins > 0 ? o.bins : (spec.is_two_type() ? 64 : 4096);
  eo.k_max = o.kmax;
  if (eo.trajectories < 1) throw UsageError("--trajectories must be >= 1");
  const double t_max = c.tmax ? *c.tmax : times.back();
  const auto st = mc::run_ensemble(spec, t_max, times, eo);
  em.seed = eo.base_seed;
  em.parameters = base_parameters(c, spec, times);
  em.parameters.update({{"trajectories", eo.trajectories},
                        {"seed", eo.base_seed},
                        {"bins", eo.bin_cap},
                        {"kmax", eo.k_max},
                        {"tmax", t_max}});
  if (c.format == "json") {
    em.emit(io::to_json(st).dump(2) + "\n");
    return kOk;
  }
  io::SnapshotTable t;
  t.trajectories = st.trajectories;
  for (std::size_t i = 0; i < times.size(); ++i) {
    auto s = st.snapshot(i);
    auto se = st.snapshot_stderr(i);
    if (!s.two_type()) {
      // Trailing empty bins carry no information.
      std::size_t keep = s.probs.size();
      while (keep > 1 && s.probs[keep - 1] == 0.0) --keep;
      s.probs.resize(keep);
      se.resize(keep);
    }
    t.snapshots.push_back(std::move(s));
    t.stderrs.push_back(std::move(se));
  }
  em.emit(render(c, spec, t));
  return kOk;
}

struct LaplaceOpts {
  long mmax = 10;
  lapinv::InversionParams p;
  std::string evaluator = "recurrence";
};

int cmd_laplace(const Common& c, LaplaceOpts o, Emitter& em) {
  const auto spec = resolve_spec(c);
  if (spec.kind != ProcessKind::NoExtinction) throw UsageError("laplace inversion covers --process noext only");
  const auto times = resolve_times(c);
  if (o.mmax < 1) throw UsageError("--mmax must be >= 1");
  if (times.front() <= 0.0) throw UsageError("laplace inversion needs t > 0");
  o.p.jobs = c.jobs;
  o.p.evaluator = o.evaluator == "quadrature" ? lapinv::Evaluator::Quadrature : lapinv::Evaluator::Recurrence;
  io::SnapshotTable t;
  for (double time : times) {
    DistributionSnapshot s;
    s.time = time;
    s.engine = Engine::LaplaceInv;
    s.origin = 1;
    s.tolerance = o.p.accuracy;
    for (const auto& r : lapinv::invert_range(o.mmax, time, o.p)) s.probs.push_back(r.value);
    s.tail_mass = one_minus_sum(s);
    t.snapshots.push_back(std::move(s));
  }
  em.parameters = base_parameters(c, spec, times);
  em.parameters.update({{"mmax", o.mmax},
                        {"A", o.p.A},
                        {"terms", o.p.terms},
                        {"euler", o.p.euler},
                        {"accuracy", o.p.accuracy},
                        {"cancel_aliasing", o.p.cancel_aliasing},
                        {"evaluator", o.evaluator}});
  em.emit(render(c, spec, t));
  return kOk;
}

struct GfOpts {
  long mmax = 32;
  long nmax = 32;
  double radius = 1.0;
};

int cmd_gf(const Common& c, const GfOpts& o, Emitter& em, std::ostream& err) {
  const auto spec = resolve_spec(c);
  if (!spec.is_two_type()) throw UsageError("gf covers --process twotype only");
  const auto times = resolve_times(c);
  characteristics::ExtractOptions eo;
  eo.radius_p = eo.radius_q = o.radius;
  eo.jobs = c.jobs;
  io::SnapshotTable t;
  for (double time : times) {
    auto ex = characteristics::extract_pmn(spec, time, o.mmax, o.nmax, eo);
    if (ex.alias_warning)
      err << "warning: t = " << time << ": tail mass " << ex.snapshot.tail_mass
          << " beyond the grid; enlarge --mmax/--nmax\n";
    t.snapshots.push_back(std::move(ex.snapshot));
  }
  em.parameters = base_parameters(c, spec, times);
  em.parameters.update({{"mmax", o.mmax}, {"nmax", o.nmax}, {"radius", o.radius}});
  em.emit(render(c, spec, t));
  return kOk;
}

//----------------------------------------------------------------------------
// compare

struct CompareOpts {
  std::string a, b;
  std::string metric = "maxabs";
  double tol = 1e-8;
  std::string report;
};

using Key = std::pair<long, long>;  // (m, n); n = 0 for one-type

std::map<Key, std::pair<double, double>> entries(const DistributionSnapshot& s, const std::vector<double>* se) {
  std::map<Key, std::pair<double, double>> out;
  for (std::size_t e = 0; e < s.probs.size(); ++e) {
    const Key k = s.two_type() ? Key{static_cast<long>(e / s.cols), static_cast<long>(e % s.cols)}
                               : Key{s.origin + static_cast<long>(e), 0};
    out[k] = {s.probs[e], se ? (*se)[e] : 0.0};
  }
  return out;
}

int cmd_compare(const CompareOpts& o, std::ostream& out) {
  const auto A = io::load_table(o.a);
  const auto B = io::load_table(o.b);
  if (A.snapshots.empty() || B.snapshots.empty()) throw SchemaMismatch("empty snapshot table");
  if (A.two_type() != B.two_type()) throw SchemaMismatch("one-type and two-type tables cannot be compared");
  if (A.snapshots.size() != B.snapshots.size()) throw SchemaMismatch("tables hold different numbers of times");
  for (std::size_t i = 0; i < A.snapshots.size(); ++i)
    if (A.snapshots[i].time != B.snapshots[i].time)
      throw SchemaMismatch("time grids differ: " + io::format_double(A.snapshots[i].time) + " vs " +
                           io::format_double(B.snapshots[i].time));
  const bool z = o.metric == "zscore";
  if (z && A.monte_carlo() == B.monte_carlo())
    throw SchemaMismatch("zscore needs exactly one Monte Carlo table");
  const auto& mcT = A.monte_carlo() ? A : B;
  const auto& refT = A.monte_carlo() ? B : A;
  const bool two = A.two_type();

  std::ofstream rep;
  if (!o.report.empty()) {
    rep.open(o.report);
    if (!rep) throw ResourceError("cannot write " + o.report);
    rep << (two ? "time,m,n,a,b,deviation\n" : "time,m,a,b,deviation\n");
  }
  auto log = [&](double t, Key k, double a, double b, double d) {
    if (!rep.is_open()) return;
    rep << io::format_double(t) << ',' << k.first << ',';
    if (two) rep << k.second << ',';
    rep << io::format_double(a) << ',' << io::format_double(b) << ',' << io::format_double(d) << '\n';
  };
  auto where = [&](Key k) {
    return two ? "(m=" + std::to_string(k.first) + ", n=" + std::to_string(k.second) + ")"
               : "m=" + std::to_string(k.first);
  };

  bool pass = true;
  double overall = 0.0;
  for (std::size_t i = 0; i < A.snapshots.size(); ++i) {
    const double t = A.snapshots[i].time;
    double worst = 0.0;
    Key worst_at{0, 0};
    std::size_t count = 0, beyond3 = 0;
    if (z) {
      const double N = static_cast<double>(mcT.trajectories);
      const auto mcE = entries(mcT.snapshots[i], &mcT.stderrs[i]);
      for (const auto& [k, v] : entries(refT.snapshots[i], nullptr)) {
        const double q = v.first;
        if (N * q < 10.0 || q >= 1.0) continue;
        const auto it = mcE.find(k);
        const double p = it == mcE.end() ? 0.0 : it->second.first;
        const double zz = (p - q) / std::sqrt(q * (1.0 - q) / N);
        log(t, k, p, q, zz);
        ++count;
        if (std::abs(zz) > 3.0) ++beyond3;
        if (std::abs(zz) > worst) {
          worst = std::abs(zz);
          worst_at = k;
        }
      }
      const double frac = count ? static_cast<double>(beyond3) / static_cast<double>(count) : 0.0;
      const bool ok = count > 0 && worst <= o.tol && frac < 0.01;
      pass = pass && ok;
      out << "time=" << io::format_double(t) << " metric=zscore bins=" << count << " max|z|=" << worst << " at "
          << where(worst_at) << " beyond3sigma=" << beyond3 << " (" << 100.0 * frac << "%) "
          << (ok ? "ok" : "FAIL") << '\n';
    } else {
      const auto eA = entries(A.snapshots[i], nullptr);
      const auto eB = entries(B.snapshots[i], nullptr);
      for (const auto& [k, va] : eA) {
        const auto it = eB.find(k);
        if (it == eB.end()) continue;
        const double a = va.first, b = it->second.first;
        double d = std::abs(a - b);
        if (o.metric == "relmax") d = d == 0.0 ? 0.0 : d / std::abs(b);
        log(t, k, a, b, d);
        ++count;
        if (d > worst || std::isnan(d)) {
          worst = d;
          worst_at = k;
        }
      }
      if (count == 0) throw SchemaMismatch("tables share no indices at t = " + io::format_double(t));
      const bool ok = worst <= o.tol;
      pass = pass && ok;
      out << "time=" << io::format_double(t) << " metric=" << o.metric << " entries=" << count
          << " worst=" << io::format_double(worst) << " at " << where(worst_at) << ' ' << (ok ? "ok" : "FAIL")
          << '\n';
    }
    overall = std::max(overall, worst);
  }
  out << (pass ? "PASS" : "FAIL") << " metric=" << o.metric << " worst=" << io::format_double(overall)
      << " tol=" << io::format_double(o.tol) << '\n';
  return pass ? kOk : kToleranceFailure;
}

//----------------------------------------------------------------------------
// scaling

struct ScalingOpts {
  std::string engine = "ode";
  long truncation = 0;
};

int cmd_scaling(const Common& c, const ScalingOpts& o, Emitter& em) {
  const auto spec = resolve_spec(c);
  if (spec.kind != ProcessKind::NoExtinction) throw UsageError("scaling covers --process noext only");
  const auto times = resolve_times(c);
  for (double t : times)
    if (!(t > 1.0)) throw UsageError("scaling times must exceed 1");

  // 24 log-spaced points on [0.05, 5] plus the reference values.
  std::vector<double> mus{0.25, 0.5, 1.0, 2.0};
  for (int i = 0; i < 24; ++i) mus.push_back(0.05 * std::pow(100.0, i / 23.0));
  std::sort(mus.begin(), mus.end());

  std::ostringstream os;
  os << "# ibp-scaling v1\n";
  os << "# profile: value = m P_m ln t at mu = m/t; collapse: profile times e^{m/t}\n";
  os << "# moment: value = <m^k> ln t / ((k-1)! t^k) at x = k\n";
  os << "quantity,time,x,m,value\n";
  for (double t : times) {
    const double lt = std::log(t);
    long m_top = 1;
    for (double mu : mus) m_top = std::max(m_top, std::lround(mu * t));
    std::function<double(long)> pm;
    std::vector<double> moments(5, 0.0);
    std::vector<lapinv::InversionResult> lap;
    DistributionSnapshot snap;
    if (o.engine == "laplace") {
      lapinv::InversionParams p;
      p.jobs = c.jobs;
      lap = lapinv::invert_range(m_top, t, p);
      pm = [&](long m) { return lap[static_cast<std::size_t>(m - 1)].value; };
      for (int k = 1; k <= 4; ++k) moments[static_cast<std::size_t>(k)] = lapinv::invert_moment(k, t, p).value;
    } else {
      mastereq::TruncationPolicy p;
      p.M = o.truncation > 0 ? o.truncation : std::max(1000L, static_cast<long>(40.0 * t));
      p.strategy = mastereq::Strategy::AdaptiveGrow;
      snap = mastereq::integrate(spec, std::vector<double>{t}, p).front();
      pm = [&](long m) { return snap.at(m); };
      moments = mastereq::moments_from_snapshot(snap, 4).values;
    }
    long last_m = 0;
    for (double mu : mus) {
      const long m = std::max(1L, std::lround(mu * t));
      if (m == last_m) continue;
      last_m = m;
      const double mu_m = static_cast<double>(m) / t;
      const double profile = static_cast<double>(m) * pm(m) * lt;
      const auto prefix = io::format_double(t) + ',' + io::format_double(mu_m) + ',' + std::to_string(m) + ',';
      os << "profile," << prefix << io::format_double(profile) << '\n';
      os << "collapse," << prefix << io::format_double(profile * std::exp(mu_m)) << '\n';
    }
    double fact = 1.0;
    for (int k = 1; k <= 4; ++k) {
      if (k > 1) fact *= k - 1;
      os << "moment," << io::format_double(t) << ',' << k << ",,"
         << io::format_double(moments[static_cast<std::size_t>(k)] * lt / (fact * std::pow(t, k))) << '\n';
    }
  }
  em.parameters = base_parameters(c, spec, times);
  em.parameters.update({{"engine", o.engine}, {"truncation", o.truncation}});
  em.emit(os.str());
  return kOk;
}

//----------------------------------------------------------------------------
// rerun

int cmd_rerun(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  json m;
  {
    std::ifstream in(manifest_path);
    if (!in) throw UsageError("cannot open " + manifest_path);
    try {
      m = json::parse(in);
    } catch (const json::exception& e) {
      throw SchemaMismatch(manifest_path + ": " + e.what());
    }
  }
  std::vector<std::string> args;
  std::vector<std::pair<std::string, std::string>> expected;
  try {
    args = m.at("command_line").get<std::vector<std::string>>();
    for (const auto& o : m.at("outputs"))
      expected.emplace_back(o.at("path").get<std::string>(), o.at("sha256").get<std::string>());
  } catch (const json::exception& e) {
    throw SchemaMismatch(manifest_path + ": " + e.what());
  }
  if (!args.empty() && args.front() == "rerun") throw UsageError("a manifest cannot replay rerun");
  const int code = run(args, out, err);
  if (code != kOk) return code;
  bool same = true;
  for (const auto& [path, digest] : expected) {
    const bool ok = sha256_file(path) == digest;
    same = same && ok;
    out << path << ": " << (ok ? "reproduced" : "DIGEST MISMATCH") << '\n';
  }
  return same ? kOk : kToleranceFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Immortal branching process toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common c;
  ExactOpts exact_o;
  auto* exact = app.add_subcommand("exact", "closed-form distributions");
  add_common(exact, c);
  exact->add_option("--mmax", exact_o.mmax, "largest m reported");
  exact->add_option("--marginal", exact_o.marginal, "two-type marginal: m or n")->check(CLI::IsMember({"m", "n"}));

  OdeOpts ode_o;
  auto* ode = app.add_subcommand("ode", "master-equation integration");
  add_common(ode, c);
  ode->add_option("--truncation", ode_o.truncation, "state cap M (two-type: m axis)");
  ode->add_option("--truncation-n", ode_o.truncation_n, "two-type n-axis cap (default: M)");
  ode->add_option("--tail-tol", ode_o.tail_tol, "tail budget for --adaptive");
  ode->add_flag("--adaptive", ode_o.adaptive, "double M until the tail budget holds");
  ode->add_option("--integrator", ode_o.integrator)->check(CLI::IsMember({"auto", "rk45", "sdirk4"}));
  ode->add_option("--mmax", ode_o.mmax, "report m up to this value (two-type: rows)");
  ode->add_option("--nmax", ode_o.nmax, "two-type: report this many n columns");

  McOpts mc_o;
  auto* mcc = app.add_subcommand("mc", "Monte Carlo ensemble");
  add_common(mcc, c);
  mcc->add_option("--trajectories", mc_o.trajectories);
  mcc->add_option("--seed", mc_o.seed, "base seed (default: $IBP_SEED, else 0)");
  mcc->add_option("--bins", mc_o.bins, "histogram cap per axis");
  mcc->add_option("--kmax", mc_o.kmax, "highest moment order")->check(CLI::NonNegativeNumber);

  LaplaceOpts lap_o;
  auto* lap = app.add_subcommand("laplace", "Laplace inversion (noext)");
  add_common(lap, c);
  lap->add_option("--mmax", lap_o.mmax);
  lap->add_option("--A", lap_o.p.A, "discretization parameter");
  lap->add_option("--terms", lap_o.p.terms);
  lap->add_option("--euler", lap_o.p.euler);
  lap->add_option("--accuracy", lap_o.p.accuracy);
  lap->add_option("--evaluator", lap_o.evaluator)->check(CLI::IsMember({"recurrence", "quadrature"}));
  bool no_cancel = false;
  lap->add_flag("--no-alias-cancel", no_cancel, "single pass at A");

  GfOpts gf_o;
  auto* gf = app.add_subcommand("gf", "generating function and FFT extraction (twotype)");
  add_common(gf, c);
  gf->add_option("--mmax", gf_o.mmax, "m-axis size (power of two)");
  gf->add_option("--nmax", gf_o.nmax, "n-axis size (power of two)");
  gf->add_option("--radius", gf_o.radius, "sampling radius in (0, 1]");

  CompareOpts cmp_o;
  auto* cmp = app.add_subcommand("compare", "compare two snapshot files");
  cmp->add_option("file_a", cmp_o.a)->required();
  cmp->add_option("file_b", cmp_o.b)->required();
  cmp->add_option("--metric", cmp_o.metric)->check(CLI::IsMember({"maxabs", "relmax", "zscore"}));
  cmp->add_option("--tol", cmp_o.tol);
  cmp->add_option("--report", cmp_o.report, "per-index deviations as CSV");

  ScalingOpts sc_o;
  auto* sc = app.add_subcommand("scaling", "scaling collapse and moment amplitudes (noext)");
  add_common(sc, c);
  sc->add_option("--engine", sc_o.engine)->check(CLI::IsMember({"ode", "laplace"}));
  sc->add_option("--truncation", sc_o.truncation);

  std::string manifest;
  auto* rerun = app.add_subcommand("rerun", "replay a manifest and verify output digests");
  rerun->add_option("manifest", manifest)->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  Emitter em{c, out, args, {}, std::nullopt, std::chrono::steady_clock::now()};
  try {
    if (*exact) return cmd_exact(c, exact_o, em);
    if (*ode) return cmd_ode(c, ode_o, em);
    if (*mcc) return cmd_mc(c, mc_o, em);
    if (*lap) {
      lap_o.p.cancel_aliasing = !no_cancel;
      return cmd_laplace(c, lap_o, em);
    }
    if (*gf) return cmd_gf(c, gf_o, em, err);
    if (*cmp) return cmd_compare(cmp_o, out);
    if (*sc) return cmd_scaling(c, sc_o, em);
    if (*rerun) return cmd_rerun(manifest, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidSpec& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const SchemaMismatch& e) {
    err << "schema mismatch: " << e.what() << '\n';
    return kEngine;
  } catch (const Error& e) {
    err << "engine error: " << e.what() << '\n';
    return kEngine;
  }
  return kUsage;
}

}  // namespace ibp::cli
