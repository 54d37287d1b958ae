// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Numerical integration of the truncated master equations.

#include <limits>
#include <span>
#include <vector>

#include "ibp/core.hpp"
#include "ibp/ode.hpp"

namespace ibp::mastereq {

enum class Strategy { Fixed, AdaptiveGrow };

enum class Integrator {
  /// SDIRK4 for one-type chains, Dormand–Prince for the two-type grid.
  Auto,
  ExplicitRK45,
  ImplicitSDIRK4,
};

struct TruncationPolicy {
  /// Largest population kept (one-type), or the m-axis cap (two-type; the
  /// grid holds m = 0..M−1).
  long M = 1000;
  /// n-axis cap for two-type (0 means "same as M").
  long M_n = 0;
  double tail_tolerance = 1e-10;
  Strategy strategy = Strategy::Fixed;
  /// AdaptiveGrow gives up with TruncationError beyond this cap.
  long max_M = 1L << 20;
  Integrator integrator = Integrator::Auto;
  ode::Tolerances tolerances{1e-11, 1e-9};
  /// One-type only: states beyond the last entry above this threshold (plus a
  /// margin) are not integrated until the distribution reaches them. 0
  /// integrates all M states from the start.
  double frontier_threshold = 1e-30;
};

/// Throws DomainError unless M >= 2 and tail_tolerance > 0.
void validate(const TruncationPolicy& policy);

/// Integrates from the process's initial condition (one cell for one-type
/// processes, the empty state for the two-type process) and returns a
/// snapshot at every time in `t_grid` (ascending, >= 0).
///
/// tail_mass is the probability in the top 1% of indices plus everything
/// that left through the truncation boundary.
std::vector<DistributionSnapshot> integrate(const ProcessSpec& spec, std::span<const double> t_grid,
                                            const TruncationPolicy& policy = {});

/// Direct summation of <m^k>, k = 0..k_max, over the snapshot's support
/// (first axis for two-type grids). Throws PrecisionError when the truncation
/// bound max_index^k_max · tail_mass exceeds `tolerance`.
MomentSet moments_from_snapshot(const DistributionSnapshot& snap, int k_max,
                                double tolerance = std::numeric_limits<double>::infinity());

/// Marginal over n of a two-type snapshot (index m = 0..rows−1).
std::vector<double> marginal_m(const DistributionSnapshot& snap);
/// Marginal over m of a two-type snapshot (index n = 0..cols−1).
std::vector<double> marginal_n(const DistributionSnapshot& snap);

}  // namespace ibp::mastereq
