// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include "ibp/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ibp/parallel.hpp"

namespace ibp::mc {

PopulationState initial_state(const ProcessSpec& spec) {
  switch (spec.kind) {
    case ProcessKind::Critical:
    case ProcessKind::NoExtinction:
      return {1, 0, false};
    case ProcessKind::Immigration:
      return {1, 0, true};
    case ProcessKind::TwoTypeSource:
      return {0, 0, true};
  }
  return {};
}

double total_rate(const ProcessSpec& spec, const PopulationState& s) {
  const double m = static_cast<double>(s.m);
  switch (spec.kind) {
    case ProcessKind::Critical:
      return 2.0 * m;
    case ProcessKind::NoExtinction:
      return s.m == 1 ? 1.0 : 2.0 * m;
    case ProcessKind::Immigration:
      return *spec.beta + 2.0 * (m - 1.0);
    case ProcessKind::TwoTypeSource:
      return *spec.beta + m + *spec.gamma * static_cast<double>(s.n);
  }
  return 0.0;
}

double step(const ProcessSpec& spec, PopulationState& s, Philox4x32& rng) {
  const double R = total_rate(spec, s);
  if (!(R > 0.0)) return std::numeric_limits<double>::infinity();
  const double dt = -std::log(rng.uniform()) / R;
  double u = rng.uniform() * R;
  const double m = static_cast<double>(s.m);
  switch (spec.kind) {
    case ProcessKind::Critical:
    case ProcessKind::NoExtinction:
      s.m += (u < m) ? 1 : -1;
      break;
    case ProcessKind::Immigration:
      // Births: β from the stem cell plus one per mortal cell.
      s.m += (u < *spec.beta + (m - 1.0)) ? 1 : -1;
      break;
    case ProcessKind::TwoTypeSource: {
      const double beta = *spec.beta, r = *spec.r;
      if (u < beta) {
        ++s.m;
        break;
      }
      u -= beta;
      if (u < m) {
        u /= m;  // uniform on [0, 1) given a progenitor event
        if (u < r) {
          ++s.m;
        } else if (u < 1.0 - r) {
          ++s.n;
        } else {
          --s.m;
          s.n += 2;
        }
        break;
      }
      --s.n;
      break;
    }
  }
  return dt;
}

std::vector<PopulationState> simulate_one(const ProcessSpec& spec, double t_max,
                                          std::span<const double> sample_times, Philox4x32& rng,
                                          const TrajectoryOptions& opt) {
  double prev = 0.0;
  for (double t : sample_times) {
    if (!(t >= prev) || t > t_max) throw DomainError("sample times must be ascending, >= 0 and <= t_max");
    prev = t;
  }
  std::vector<PopulationState> out;
  out.reserve(sample_times.size());
  PopulationState s = initial_state(spec);
  double t = 0.0;
  std::uint64_t events = 0;
  std::size_t j = 0;
  while (j < sample_times.size()) {
    PopulationState next = s;
    const double dt = step(spec, next, rng);
    const double t_next = t + dt;
    while (j < sample_times.size() && sample_times[j] < t_next) {
      out.push_back(s);
      ++j;
    }
    if (j == sample_times.size()) break;
    s = next;
    t = t_next;
    if (++events > opt.max_events)
      throw ResourceError("trajectory exceeded " + std::to_string(opt.max_events) + " events");
  }
  return out;
}

//----------------------------------------------------------------------------

namespace {

// Trajectories per reduction chunk. Fixed so the floating-point reduction
// order does not depend on the thread count.
constexpr std::uint64_t kChunk = 1024;

// Running mean and sum of squared deviations (Chan et al. merge).
struct Welford {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  void merge(const Welford& o) {
    if (o.count == 0.0) return;
    const double n = count + o.count;
    const double d = o.mean - mean;
    mean += d * o.count / n;
    m2 += o.m2 + d * d * count * o.count / n;
    count = n;
  }
};

std::vector<MomentEstimate> finish(const std::vector<Welford>& w) {
  std::vector<MomentEstimate> out;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double var = w[k].count > 1.0 ? w[k].m2 / (w[k].count - 1.0) : 0.0;
    out.push_back({static_cast<int>(k), w[k].mean, std::sqrt(var / w[k].count)});
  }
  return out;
}

}  // namespace

EnsembleStats run_ensemble(const ProcessSpec& spec, double t_max, std::span<const double> sample_times,
                           const EnsembleOptions& opt) {
  require_valid(spec);
  if (opt.trajectories < 1) throw DomainError("run_ensemble requires at least one trajectory");
  if (opt.bin_cap < 1 || opt.bin_cap_n < 0 || opt.k_max < 0) throw DomainError("invalid ensemble options");
  if (sample_times.empty()) throw DomainError("run_ensemble requires sample times");

  EnsembleStats st;
  st.spec = spec;
  st.base_seed = opt.base_seed;
  st.trajectories = opt.trajectories;
  st.sample_times.assign(sample_times.begin(), sample_times.end());
  const bool two = spec.is_two_type();
  st.rows = static_cast<std::size_t>(opt.bin_cap);
  st.cols = two ? static_cast<std::size_t>(opt.bin_cap_n > 0 ? opt.bin_cap_n : opt.bin_cap) : 0;
  const std::size_t bins = two ? st.rows * st.cols : st.rows;
  const std::size_t T = sample_times.size();
  if (bins > opt.max_cells / T / std::max(1u, opt.jobs))
    throw ResourceError("histogram of " + std::to_string(bins) + " bins x " + std::to_string(T) +
                        " times exceeds the memory cap");
  const std::size_t K = static_cast<std::size_t>(opt.k_max) + 1;

  const std::uint64_t chunks = (opt.trajectories + kChunk - 1) / kChunk;
  // Per chunk, per time: moment accumulators for m (and n).
  std::vector<std::vector<Welford>> acc_m(chunks), acc_n(two ? chunks : 0);
  const unsigned jobs = std::max(1u, opt.jobs);
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(jobs, chunks));
  std::vector<std::vector<std::uint64_t>> hist(workers, std::vector<std::uint64_t>(bins * T, 0));
  std::vector<std::vector<std::uint64_t>> over(workers, std::vector<std::uint64_t>(T, 0));

  parallel_for(workers, workers, [&](std::size_t w) {
    auto& h = hist[w];
    auto& ov = over[w];
    for (std::uint64_t c = chunks * w / workers; c < chunks * (w + 1) / workers; ++c) {
      acc_m[c].assign(T * K, {});
      if (two) acc_n[c].assign(T * K, {});
      const std::uint64_t end = std::min(opt.trajectories, (c + 1) * kChunk);
      for (std::uint64_t i = c * kChunk; i < end; ++i) {
        Philox4x32 rng(opt.base_seed, i);
        const auto states = simulate_one(spec, t_max, sample_times, rng, opt.trajectory);
        for (std::size_t j = 0; j < T; ++j) {
          const auto& s = states[j];
          const auto mi = static_cast<std::size_t>(s.m);
          const auto ni = static_cast<std::size_t>(s.n);
          if (mi >= st.rows || (two && ni >= st.cols))
            ++ov[j];
          else
            ++h[j * bins + (two ? mi * st.cols + ni : mi)];
          double pm = 1.0, pn = 1.0;
          for (std::size_t k = 0; k < K; ++k) {
            acc_m[c][j * K + k].add(pm);
            pm *= static_cast<double>(s.m);
            if (two) {
              acc_n[c][j * K + k].add(pn);
              pn *= static_cast<double>(s.n);
            }
          }
        }
      }
    }
  });

  st.histograms.assign(T, std::vector<std::uint64_t>(bins, 0));
  st.overflow.assign(T, 0);
  for (unsigned w = 0; w < workers; ++w) {
    for (std::size_t j = 0; j < T; ++j) {
      st.overflow[j] += over[w][j];
      for (std::size_t b = 0; b < bins; ++b) st.histograms[j][b] += hist[w][j * bins + b];
    }
  }
  for (std::size_t j = 0; j < T; ++j) {
    std::vector<Welford> wm(K), wn(two ? K : 0);
    for (std::uint64_t c = 0; c < chunks; ++c) {
      for (std::size_t k = 0; k < K; ++k) {
        wm[k].merge(acc_m[c][j * K + k]);
        if (two) wn[k].merge(acc_n[c][j * K + k]);
      }
    }
    st.moments.push_back(finish(wm));
    if (two) st.moments_n.push_back(finish(wn));
  }
  return st;
}

DistributionSnapshot EnsembleStats::snapshot(std::size_t i) const {
  DistributionSnapshot s;
  s.time = sample_times.at(i);
  s.engine = Engine::MonteCarlo;
  const double N = static_cast<double>(trajectories);
  const auto& h = histograms.at(i);
  if (two_type()) {
    s.origin = 0;
    s.rows = rows;
    s.cols = cols;
    s.probs.reserve(h.size());
    for (auto c : h) s.probs.push_back(static_cast<double>(c) / N);
  } else {
    s.origin = 1;
    s.absorbed_mass = static_cast<double>(h[0]) / N;
    for (std::size_t b = 1; b < h.size(); ++b) s.probs.push_back(static_cast<double>(h[b]) / N);
  }
  s.tail_mass = static_cast<double>(overflow.at(i)) / N;
  return s;
}

std::vector<double> EnsembleStats::snapshot_stderr(std::size_t i) const {
  const auto snap = snapshot(i);
  const double N = static_cast<double>(trajectories);
  std::vector<double> out;
  out.reserve(snap.probs.size());
  for (double p : snap.probs) out.push_back(std::sqrt(p * (1.0 - p) / N));
  return out;
}

}  // namespace ibp::mc
