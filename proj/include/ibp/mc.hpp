// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Exact event-driven simulation of the four reaction schemes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ibp/core.hpp"
#include "ibp/rng.hpp"

namespace ibp::mc {

/// m is reported in the snapshot convention: for Immigration it counts the
/// stem cell plus the mortal cells, so m >= 1.
struct PopulationState {
  long m = 0;
  long n = 0;
  bool stem_active = false;

  friend bool operator==(const PopulationState&, const PopulationState&) = default;
};

PopulationState initial_state(const ProcessSpec& spec);

/// Total event rate in `state`; 0 means absorbing.
double total_rate(const ProcessSpec& spec, const PopulationState& state);

/// Performs one event and returns its waiting time, or +inf (state
/// unchanged) when the state is absorbing.
double step(const ProcessSpec& spec, PopulationState& state, Philox4x32& rng);

struct TrajectoryOptions {
  /// Events per trajectory before ResourceError.
  std::uint64_t max_events = 2'000'000'000;
};

/// States at each of `sample_times` (non-decreasing, >= 0, last <= t_max).
std::vector<PopulationState> simulate_one(const ProcessSpec& spec, double t_max,
                                          std::span<const double> sample_times, Philox4x32& rng,
                                          const TrajectoryOptions& opt = {});

struct MomentEstimate {
  int k = 0;
  double value = 0.0;
  /// Sample standard deviation of m^k over √trajectories.
  double std_error = 0.0;
};

struct EnsembleOptions {
  std::uint64_t trajectories = 100'000;
  std::uint64_t base_seed = 0;
  unsigned jobs = 1;
  /// One-type: bins m = 0..bin_cap−1. Two-type: m and n axes each hold
  /// 0..bin_cap−1 unless bin_cap_n is set.
  long bin_cap = 4096;
  long bin_cap_n = 0;
  int k_max = 4;
  /// Histogram cells (bins x sample times) allowed before ResourceError.
  std::size_t max_cells = 200'000'000;
  TrajectoryOptions trajectory;
};

struct EnsembleStats {
  ProcessSpec spec;
  std::uint64_t base_seed = 0;
  std::uint64_t trajectories = 0;
  std::vector<double> sample_times;
  /// Histogram shape: one-type rows = bin_cap, cols = 0; two-type rows x
  /// cols over (m, n), row-major. Bin 0 of a one-type histogram holds
  /// extinct trajectories.
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<std::uint64_t>> histograms;
  std::vector<std::uint64_t> overflow;
  /// Per sample time, k = 0..k_max of m.
  std::vector<std::vector<MomentEstimate>> moments;
  /// Same for n (two-type only).
  std::vector<std::vector<MomentEstimate>> moments_n;

  bool two_type() const { return cols != 0; }
  /// Empirical distribution at sample i, engine MonteCarlo; overflow is
  /// reported as tail_mass and one-type bin 0 as absorbed_mass.
  DistributionSnapshot snapshot(std::size_t i) const;
  /// Binomial standard error √(p(1−p)/N) of each snapshot entry.
  std::vector<double> snapshot_stderr(std::size_t i) const;
};

/// Trajectory i draws from Philox4x32(base_seed, i). The result does not
/// depend on opt.jobs.
EnsembleStats run_ensemble(const ProcessSpec& spec, double t_max, std::span<const double> sample_times,
                           const EnsembleOptions& opt);

}  // namespace ibp::mc
