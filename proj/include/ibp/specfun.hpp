// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>

namespace ibp::specfun {

using complex = std::complex<double>;

/// Upper incomplete gamma function Γ(0, s) = E₁(s) = ∫_s^∞ e^{-u}/u du for
/// Re s > 0. Power series below |s| = 1, modified Lentz continued fraction
/// above. Throws DomainError if Re s <= 0.
complex gamma0(complex s);
double gamma0(double s);

/// e^s Γ(0, s). Finite for large |s| where e^s alone would overflow.
complex scaled_gamma0(complex s);

/// The two internal branches, exposed for crossover testing.
complex gamma0_series(complex s);
complex scaled_gamma0_continued_fraction(complex s);

/// ln Γ(a) − ln Γ(b), stable when a and b are large and close.
double log_gamma_ratio(double a, double b);

}  // namespace ibp::specfun
