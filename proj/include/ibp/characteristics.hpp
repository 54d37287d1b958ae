// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Generating function of the two-type process with source by backward
// integration along characteristics, and coefficient extraction by FFT.

#include <complex>
#include <string>

#include "ibp/core.hpp"
#include "ibp/ode.hpp"

namespace ibp::characteristics {

using complex = std::complex<double>;

/// 𝒫(X, Y, T) = Σ P_{m,n}(T) X^m Y^n with parameters (r, γ, β) from `spec`.
struct GFQuery {
  complex X{1.0, 0.0};
  complex Y{1.0, 0.0};
  double T = 1.0;
  ProcessSpec spec = ProcessSpec::two_type(0.25, 1.0, 1.0);
};

struct GFOptions {
  ode::Tolerances tolerances{1e-11, 1e-10};
  /// |x(t)| beyond this aborts with ConvergenceError.
  double blowup = 10.0;
};

/// Integrates dx/dt = x(1−y) − r(x−y)² from x(T) = X back to t = 0 with
/// y(t) = 1 + (Y−1)e^{γ(t−T)}, alongside ∫(x−1)dt, and returns
/// exp(β ∫₀^T (x−1) dt). Requires |X|, |Y| <= 1 and T >= 0.
complex eval_gf(const GFQuery& q, const GFOptions& opt = {});

/// Elementary solution at r = 1/4, γ = 1:
/// exp[β(1−e^{−T})(1−Y)] / [1 + T/4 (2−X−Y)]^{4β}.
complex eval_gf_special(const GFQuery& q);

struct ExtractOptions {
  /// Sampling radii for the x and y circles, in (0, 1].
  double radius_p = 1.0;
  double radius_q = 1.0;
  /// Evaluate only one node of each conjugate pair.
  bool use_symmetry = true;
  unsigned jobs = 1;
  GFOptions gf;
};

struct Extraction {
  /// P_{m,n}, m < M_p, n < M_q, engine Characteristics. tail_mass is the
  /// mass the 2M_p x 2M_q transform places outside the reported block.
  DistributionSnapshot snapshot;
  /// Largest imaginary part discarded from the reported block.
  double max_imag = 0.0;
  /// Set when tail_mass > 1e−6: the reported block may be aliased.
  bool alias_warning = false;
};

/// Samples 𝒫 on a 2M_p x 2M_q grid of scaled roots of unity and inverts
/// with a 2D FFT. M_p and M_q must be powers of two. Throws
/// ConvergenceError when an imaginary part above 1e−10 survives.
/// Version string of the FFT backend.
std::string fft_backend_version();

Extraction extract_pmn(const ProcessSpec& spec, double T, long M_p, long M_q, const ExtractOptions& opt = {});

}  // namespace ibp::characteristics
