// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ibp::ode {

struct Tolerances {
  double abs = 1e-11;
  double rel = 1e-9;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Called after every accepted step. May resize y (the integrator restarts its
/// FSAL stage when the size changes) or throw to abort.
using StepHook = std::function<void(double t, std::vector<double>& y)>;

/// Explicit Dormand–Prince 5(4) pair with max-norm error control. Integrates
/// in either direction (t1 < t0 is allowed).
class DormandPrince45 {
 public:
  explicit DormandPrince45(Tolerances tol = {}, std::size_t max_steps = 50'000'000)
      : tol_(tol), max_steps_(max_steps) {}

  /// Advances y from t0 to t1. Throws StiffnessError if the step size
  /// underflows or the step budget runs out.
  void integrate(const Rhs& f, double t0, double t1, std::vector<double>& y,
                 const StepHook& hook = {});

  const Stats& stats() const { return stats_; }
  /// Step size to reuse for the next call (0 = choose automatically).
  double last_step() const { return h_; }
  void reset_step() { h_ = 0.0; }

 private:
  double initial_step(const Rhs& f, double t0, double dir, std::span<const double> y,
                      std::span<const double> f0);

  Tolerances tol_;
  std::size_t max_steps_;
  Stats stats_;
  double h_ = 0.0;
};

/// Generator of a one-dimensional birth–death chain on states 0..K:
/// dp_i/dt = b_{i−1} p_{i−1} + d_{i+1} p_{i+1} − (b_i + d_i) p_i.
/// A state with b = d = 0 is absorbing.
struct BirthDeathGenerator {
  std::vector<double> birth;
  std::vector<double> death;

  std::size_t size() const { return birth.size(); }
  void apply(std::span<const double> p, std::span<double> out) const;
  /// Solves (I − c·G) x = rhs in place by the Thomas algorithm. I − cG is
  /// column diagonally dominant, so no pivoting is needed.
  void solve_shifted(double c, std::span<double> x) const;
};

/// Singly diagonally implicit RK of order 4 with embedded order-3 estimate
/// (L-stable, stiffly accurate, γ = 1/4) for linear birth–death chains.
/// Every stage costs one tridiagonal solve, so the step size is limited by
/// accuracy rather than by the O(K) spectral radius.
class Sdirk4 {
 public:
  explicit Sdirk4(Tolerances tol = {}, std::size_t max_steps = 10'000'000)
      : tol_(tol), max_steps_(max_steps) {}

  /// A hook that resizes y must resize `gen` to match before returning.
  void integrate(const BirthDeathGenerator& gen, double t0, double t1, std::vector<double>& y,
                 const StepHook& hook = {});

  const Stats& stats() const { return stats_; }
  double last_step() const { return h_; }

 private:
  Tolerances tol_;
  std::size_t max_steps_;
  Stats stats_;
  double h_ = 0.0;
};

}  // namespace ibp::ode
