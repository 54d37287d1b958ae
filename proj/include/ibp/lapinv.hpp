// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Laplace-domain solution of the no-extinction model and numerical inversion
// back to the time domain.

#include <complex>
#include <functional>
#include <vector>

#include "ibp/core.hpp"
#include "ibp/quadrature.hpp"

namespace ibp::lapinv {

using complex = std::complex<double>;

struct LaplaceQuery {
  long m = 1;
  complex s{1.0, 0.0};
};

/// P̃₁(s) = 1/(s e^s Γ(0,s)) − 1.
complex p1_tilde(complex s);

/// P̃_m(s) = [1/(s e^s Γ(0,s))] ∫₀^∞ e^{−sη} η^{m−1}/(1+η)^{m+1} dη by adaptive
/// Gauss–Kronrod quadrature after η = u/(1−u). Throws DomainError outside
/// the right half-plane and ConvergenceError if the quadrature misses its
/// error target.
complex pm_tilde(long m, complex s, const quad::Options& opt = {});
inline complex pm_tilde(const LaplaceQuery& q) { return pm_tilde(q.m, q.s); }

/// P̃_1(s) .. P̃_{m_max}(s) (index 0 unused) from the three-term recurrence
/// run backward (Miller's algorithm) and normalized by p1_tilde.
std::vector<complex> pm_tilde_recurrence(long m_max, complex s);

/// Residual (s+2m)P̃_m − (m−1)P̃_{m−1} − (m+1)P̃_{m+1} for m >= 2, or
/// (s+1)P̃_1 − 2P̃_2 − 1 for m = 1.
complex recurrence_residual(long m, complex s, const std::function<complex(long)>& pm);

/// Laplace transform of <m^k>(t), k >= 1, from the closed moment hierarchy
/// d<m^k>/dt = 2 Σ_a C(k,2a) <m^{k−2a+1}> + P₁ with <m^k>(0) = 1.
complex moment_tilde(int k, complex s);

//----------------------------------------------------------------------------
// Fourier-series inversion with Euler summation
//----------------------------------------------------------------------------

enum class Evaluator { Recurrence, Quadrature };

struct InversionParams {
  /// Discretization parameter; aliasing error is about e^{−A}.
  double A = 18.4;
  /// Terms summed before Euler averaging begins.
  int terms = 50;
  /// Binomial averaging depth.
  int euler = 12;
  /// Convergence target on the last Euler increment (relative once the
  /// value exceeds 1).
  double accuracy = 1e-6;
  unsigned jobs = 1;
  Evaluator evaluator = Evaluator::Recurrence;
  /// Repeat the sum at A + ln 2 and combine the two so that the leading
  /// aliasing term e^{−A} f(3t) cancels. Doubles the node count.
  bool cancel_aliasing = true;
};

struct InversionResult {
  double value = 0.0;
  /// |E(n) − E(n−1)| between the last two Euler averages.
  double last_increment = 0.0;
  /// Magnitude of the final alternating term.
  double oscillation = 0.0;
};

/// Nodes s_k = A/(2t) + iπk/t, k = 0..terms+euler.
std::vector<complex> inversion_nodes(double t, const InversionParams& p);

/// Inverts a transform given its values at inversion_nodes(t, p). Single
/// pass at p.A; cancel_aliasing is not applied here.
InversionResult euler_sum(const std::vector<complex>& values, double t, const InversionParams& p);

/// Generic inversion of F at time t > 0. Node evaluations may run on
/// p.jobs threads; summation order is fixed.
InversionResult invert_transform(const std::function<complex(complex)>& F, double t,
                                 const InversionParams& p = {});

/// P_m(t) for the no-extinction model.
InversionResult invert(long m, double t, const InversionParams& p = {});

/// P_1(t) .. P_{m_max}(t) sharing one set of node evaluations.
std::vector<InversionResult> invert_range(long m_max, double t, const InversionParams& p = {});

/// <m^k>(t) for the no-extinction model.
InversionResult invert_moment(int k, double t, const InversionParams& p = {});

}  // namespace ibp::lapinv
