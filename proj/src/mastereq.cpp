// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include "ibp/mastereq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ibp::mastereq {

void validate(const TruncationPolicy& policy) {
  if (policy.M < 2) throw DomainError("truncation requires M >= 2");
  if (policy.M_n != 0 && policy.M_n < 2) throw DomainError("truncation requires M_n >= 2");
  if (!(policy.tail_tolerance > 0.0)) throw DomainError("tail_tolerance must be positive");
}

namespace {

void check_grid(std::span<const double> t_grid) {
  double prev = 0.0;
  for (double t : t_grid) {
    if (!(t >= prev) || !std::isfinite(t))
      throw DomainError("time grid must be ascending, finite and >= 0");
    prev = t;
  }
}

// Number of indices in the "top 1%" band used for the tail estimate.
long top_band(long count) { return std::max(1L, count / 100); }

//----------------------------------------------------------------------------
// One-type birth–death chains
//----------------------------------------------------------------------------

struct Chain {
  ProcessSpec spec;
  long first = 1;  // smallest population held in the state vector

  explicit Chain(const ProcessSpec& s) : spec(s) {
    first = s.kind == ProcessKind::Critical ? 0 : 1;
  }

  // (birth, death) rates out of population p.
  std::pair<double, double> rates(long p) const {
    const double dp = static_cast<double>(p);
    switch (spec.kind) {
      case ProcessKind::Critical:
        return {dp, dp};
      case ProcessKind::NoExtinction:
        return {dp, p >= 2 ? dp : 0.0};
      case ProcessKind::Immigration:
        return {*spec.beta + (dp - 1.0), dp - 1.0};
      case ProcessKind::TwoTypeSource:
        break;
    }
    throw DomainError("not a one-type process");
  }

  // States first..K followed by one absorbing sink.
  void build(ode::BirthDeathGenerator& gen, long K) const {
    const auto n = static_cast<std::size_t>(K - first + 2);
    gen.birth.assign(n, 0.0);
    gen.death.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      auto [b, d] = rates(first + static_cast<long>(i));
      gen.birth[i] = b;
      gen.death[i] = d;
    }
  }
};

std::vector<DistributionSnapshot> integrate_one_type(const ProcessSpec& spec,
                                                     std::span<const double> t_grid,
                                                     const TruncationPolicy& policy) {
  const Chain chain(spec);
  const long first = chain.first;
  long M = policy.M;

  // Explicit steps leave atol-sized noise in far-tail entries, which the
  // m^k weights of higher moments amplify; the L-stable SDIRK4 damps it.
  const bool implicit = policy.integrator != Integrator::ExplicitRK45;

  const bool frontier = policy.frontier_threshold > 0.0;
  long K = frontier ? std::min(M, first + 64) : M;
  std::vector<double> y(static_cast<std::size_t>(K - first + 2), 0.0);
  y[static_cast<std::size_t>(1 - first)] = 1.0;
  double lost_carry = 0.0;

  ode::BirthDeathGenerator gen;
  chain.build(gen, K);

  auto sink = [&]() -> double& { return y.back(); };

  ode::StepHook hook;
  if (frontier) {
    hook = [&](double, std::vector<double>& state) {
      if (K >= M) return;
      std::size_t hi = 0;
      for (std::size_t i = state.size() - 1; i-- > 0;) {
        if (std::abs(state[i]) > policy.frontier_threshold) {
          hi = i;
          break;
        }
      }
      const long pop_hi = first + static_cast<long>(hi);
      const long need = pop_hi + std::max(16L, pop_hi / 4);
      if (need <= K) return;
      const long newK = std::min(M, std::max(need, K + K / 2));
      // The old sink becomes the real state K+1; a fresh sink is appended.
      state.resize(static_cast<std::size_t>(newK - first + 2), 0.0);
      K = newK;
      chain.build(gen, K);
    };
  }

  ode::Tolerances tol = policy.tolerances;
  ode::DormandPrince45 explicit_solver(tol);
  ode::Sdirk4 implicit_solver(tol);
  auto rhs = [&](double, std::span<const double> p, std::span<double> dp) { gen.apply(p, dp); };

  std::vector<DistributionSnapshot> out;
  out.reserve(t_grid.size());
  double t_prev = 0.0;

  for (std::size_t gi = 0; gi < t_grid.size();) {
    const double t_next = t_grid[gi];
    const auto checkpoint = y;
    const long checkpoint_K = K;
    const double checkpoint_lost = lost_carry;

    if (t_next > t_prev) {
      if (implicit)
        implicit_solver.integrate(gen, t_prev, t_next, y, hook);
      else
        explicit_solver.integrate(rhs, t_prev, t_next, y, hook);
    }

    // Assemble the snapshot over populations 1..M.
    DistributionSnapshot snap;
    snap.time = t_next;
    snap.engine = Engine::MasterEq;
    snap.origin = 1;
    snap.tolerance = tol.rel;
    snap.probs.assign(static_cast<std::size_t>(M), 0.0);
    const long real_top = K < M ? K + 1 : K;  // pending sink is a real state below M
    for (long p = 1; p <= real_top; ++p) {
      double v = y[static_cast<std::size_t>(p - first)];
      if (v < 0.0) {
        snap.clamped_mass += -v;
        v = 0.0;
      }
      snap.probs[static_cast<std::size_t>(p - 1)] = v;
    }
    if (first == 0) snap.absorbed_mass = std::max(0.0, y[0]);
    const double lost = (K >= M ? sink() : 0.0) + lost_carry;
    double band = 0.0;
    for (long p = M - top_band(M) + 1; p <= M; ++p) band += snap.probs[static_cast<std::size_t>(p - 1)];
    snap.tail_mass = band + std::max(0.0, lost);

    if (policy.strategy == Strategy::AdaptiveGrow && snap.tail_mass > policy.tail_tolerance) {
      if (2 * M > policy.max_M)
        throw TruncationError("tail mass " + std::to_string(snap.tail_mass) +
                              " exceeds tolerance at the memory cap M = " + std::to_string(M));
      y = checkpoint;
      K = checkpoint_K;
      lost_carry = checkpoint_lost;
      if (K >= M) {
        lost_carry += y.back();
        y.back() = 0.0;
      }
      M *= 2;
      if (!frontier) {
        y.resize(static_cast<std::size_t>(M - first + 2), 0.0);
        K = M;
      }
      chain.build(gen, K);
      explicit_solver.reset_step();
      continue;
    }
    out.push_back(std::move(snap));
    t_prev = t_next;
    ++gi;
  }
  return out;
}

//----------------------------------------------------------------------------
// Two-type grid
//----------------------------------------------------------------------------

struct Grid {
  long rows = 0;  // m = 0..rows−1
  long cols = 0;  // n = 0..cols−1
  std::size_t index(long m, long n) const {
    return static_cast<std::size_t>(m * cols + n);
  }
  std::size_t sink() const { return static_cast<std::size_t>(rows * cols); }
};

std::vector<DistributionSnapshot> integrate_two_type(const ProcessSpec& spec,
                                                     std::span<const double> t_grid,
                                                     const TruncationPolicy& policy) {
  if (policy.integrator == Integrator::ImplicitSDIRK4)
    throw DomainError("the implicit integrator supports one-type processes only");
  const double beta = *spec.beta;
  const double r = *spec.r;
  const double gamma = *spec.gamma;

  Grid grid{policy.M, policy.M_n > 0 ? policy.M_n : policy.M};
  std::vector<double> y(grid.sink() + 1, 0.0);
  y[grid.index(0, 0)] = 1.0;
  double lost_carry = 0.0;

  auto rhs = [&](double, std::span<const double> p, std::span<double> dp) {
    std::fill(dp.begin(), dp.end(), 0.0);
    const std::size_t sink = grid.sink();
    for (long m = 0; m < grid.rows; ++m) {
      const double dm = static_cast<double>(m);
      for (long n = 0; n < grid.cols; ++n) {
        const std::size_t i = grid.index(m, n);
        const double v = p[i];
        if (v == 0.0) continue;
        const double dn = static_cast<double>(n);
        dp[i] -= (beta + dm + gamma * dn) * v;
        // S→S+P and P→P+P
        dp[m + 1 < grid.rows ? grid.index(m + 1, n) : sink] += (beta + r * dm) * v;
        if (m > 0) {
          // P→P+M
          dp[n + 1 < grid.cols ? grid.index(m, n + 1) : sink] += (1.0 - 2.0 * r) * dm * v;
          // P→M+M
          dp[n + 2 < grid.cols ? grid.index(m - 1, n + 2) : sink] += r * dm * v;
        }
        // M→∅
        if (n > 0) dp[grid.index(m, n - 1)] += gamma * dn * v;
      }
    }
  };

  ode::DormandPrince45 solver(policy.tolerances);
  std::vector<DistributionSnapshot> out;
  double t_prev = 0.0;

  for (std::size_t gi = 0; gi < t_grid.size();) {
    const double t_next = t_grid[gi];
    const auto checkpoint = y;
    if (t_next > t_prev) solver.integrate(rhs, t_prev, t_next, y);

    DistributionSnapshot snap;
    snap.time = t_next;
    snap.engine = Engine::MasterEq;
    snap.origin = 0;
    snap.rows = static_cast<std::size_t>(grid.rows);
    snap.cols = static_cast<std::size_t>(grid.cols);
    snap.tolerance = policy.tolerances.rel;
    snap.probs.assign(y.begin(), y.begin() + static_cast<long>(grid.sink()));
    for (auto& v : snap.probs) {
      if (v < 0.0) {
        snap.clamped_mass += -v;
        v = 0.0;
      }
    }
    const long row_cut = grid.rows - top_band(grid.rows);
    const long col_cut = grid.cols - top_band(grid.cols);
    double band = 0.0;
    for (long m = 0; m < grid.rows; ++m)
      for (long n = 0; n < grid.cols; ++n)
        if (m >= row_cut || n >= col_cut) band += snap.probs[grid.index(m, n)];
    snap.tail_mass = band + std::max(0.0, y[grid.sink()]) + lost_carry;

    if (policy.strategy == Strategy::AdaptiveGrow && snap.tail_mass > policy.tail_tolerance) {
      if (2 * std::max(grid.rows, grid.cols) > policy.max_M)
        throw TruncationError("tail mass " + std::to_string(snap.tail_mass) +
                              " exceeds tolerance at the memory cap");
      Grid bigger{2 * grid.rows, 2 * grid.cols};
      std::vector<double> grown(bigger.sink() + 1, 0.0);
      for (long m = 0; m < grid.rows; ++m)
        for (long n = 0; n < grid.cols; ++n) grown[bigger.index(m, n)] = checkpoint[grid.index(m, n)];
      lost_carry += checkpoint[grid.sink()];
      grid = bigger;
      y = std::move(grown);
      solver.reset_step();
      continue;
    }
    out.push_back(std::move(snap));
    t_prev = t_next;
    ++gi;
  }
  return out;
}

}  // namespace

std::vector<DistributionSnapshot> integrate(const ProcessSpec& spec, std::span<const double> t_grid,
                                            const TruncationPolicy& policy) {
  require_valid(spec);
  validate(policy);
  check_grid(t_grid);
  if (spec.is_two_type()) return integrate_two_type(spec, t_grid, policy);
  return integrate_one_type(spec, t_grid, policy);
}

MomentSet moments_from_snapshot(const DistributionSnapshot& snap, int k_max, double tolerance) {
  if (k_max < 0) throw DomainError("k_max must be >= 0");
  MomentSet ms;
  ms.time = snap.time;
  ms.values.assign(static_cast<std::size_t>(k_max) + 1, 0.0);

  std::vector<double> weights;
  long origin = snap.origin;
  if (snap.two_type()) {
    weights = marginal_m(snap);
    origin = 0;
  }
  const std::vector<double>& w = snap.two_type() ? weights : snap.probs;
  // Sum from the top down so small tail terms are not lost.
  for (std::size_t i = w.size(); i-- > 0;) {
    const double m = static_cast<double>(origin + static_cast<long>(i));
    double power = 1.0;
    for (int k = 0; k <= k_max; ++k) {
      ms.values[static_cast<std::size_t>(k)] += power * w[i];
      power *= m;
    }
  }
  const double top = static_cast<double>(origin + static_cast<long>(w.size()) - 1);
  ms.truncation_bound = std::pow(std::max(1.0, top), k_max) * snap.tail_mass;
  if (ms.truncation_bound > tolerance)
    throw PrecisionError("moment of order " + std::to_string(k_max) + " has truncation bound " +
                         std::to_string(ms.truncation_bound) + " above tolerance " +
                         std::to_string(tolerance));
  return ms;
}

std::vector<double> marginal_m(const DistributionSnapshot& snap) {
  if (!snap.two_type()) throw DomainError("marginal_m needs a two-type snapshot");
  std::vector<double> out(snap.rows, 0.0);
  for (std::size_t m = 0; m < snap.rows; ++m)
    for (std::size_t n = 0; n < snap.cols; ++n) out[m] += snap.at(m, n);
  return out;
}

std::vector<double> marginal_n(const DistributionSnapshot& snap) {
  if (!snap.two_type()) throw DomainError("marginal_n needs a two-type snapshot");
  std::vector<double> out(snap.cols, 0.0);
  for (std::size_t m = 0; m < snap.rows; ++m)
    for (std::size_t n = 0; n < snap.cols; ++n) out[n] += snap.at(m, n);
  return out;
}

}  // namespace ibp::mastereq
