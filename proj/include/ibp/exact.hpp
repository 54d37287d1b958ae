// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Closed-form distributions, moments and asymptotic laws. Exact results and
// leading-order asymptotics live in separate functions; nothing here swaps
// one for the other.

#include <cstddef>
#include <vector>

#include "ibp/core.hpp"

namespace ibp::exact {

struct ScalingPoint {
  double mu = 0.0;
  double value = 0.0;
};

/// Result of a normalization sum with an additive tail bound.
struct TruncatedSum {
  double sum = 0.0;
  double tail_bound = 0.0;
  long terms = 0;
};

//--- Critical branching ------------------------------------------------------

/// P_m(t) = t^{m−1} / (1+t)^{m+1}, m >= 1.
double critical_pm(long m, double t);

/// Moments <m^k>, k = 0..k_max. k <= 2 use the closed forms; higher orders
/// are summed with a tail bound below 1e−12 (relative).
MomentSet critical_moments(double t, int k_max);

/// Σ_{m>=1} P_m(t), which equals the survival probability 1/(1+t).
TruncatedSum critical_survival_sum(double t, double tail_tol = 1e-12);

//--- Branching with input ----------------------------------------------------

/// P_m(t) = Γ(m−1+β)/(Γ(m)Γ(β)) · t^{m−1}/(1+t)^{m−1+β}; m counts the stem
/// cell plus m−1 mortal cells.
double immigration_pm(long m, double t, double beta);

TruncatedSum immigration_normalization(double t, double beta, double tail_tol = 1e-12);

/// Φ(μ) = μ^{β−1} e^{−μ} / Γ(β).
ScalingPoint immigration_scaling(double mu, double beta);

/// Leading-order t^k Γ(β+k)/Γ(β).
double immigration_moments(double t, int k, double beta);

//--- Branching without extinction (asymptotics only) -------------------------

/// 1/(m ln t), valid for t >> 1 and m << t.
double noext_small_m_asymptote(long m, double t);

/// (1/m)(1/ln t) e^{−m/t}. Accepts real m so that μ = m/t can be continuous.
double noext_scaling_pm(double m, double t);

/// (k−1)! t^k / ln t.
double noext_moment_asymptote(double t, int k);

//--- Two-type branching with source at r = 1/4, γ = 1 ------------------------

/// Probability of m progenitor cells (any number of post-mitotic cells).
double twotype_special_pm(long m, double t, double beta);

/// Probability of m progenitor and zero post-mitotic cells.
double twotype_special_pm0(long m, double t, double beta);

/// Probability of n post-mitotic cells (any number of progenitors).
double twotype_special_pin(long n, double t, double beta);

/// Probability that the system is empty.
double twotype_special_p00(double t, double beta);

/// Σ_m P_{m,0}(t) as given by the generating function at x = 1, y = 0.
double twotype_special_no_postmitotic(double t, double beta);

/// Full snapshot helpers used by the CLI and the acceptance suite.
DistributionSnapshot critical_snapshot(double t, long m_max);
DistributionSnapshot immigration_snapshot(double t, double beta, long m_max);

}  // namespace ibp::exact
