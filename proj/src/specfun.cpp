// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include "ibp/specfun.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ibp/core.hpp"

namespace ibp::specfun {

namespace {

void check_half_plane(complex s) {
  if (!(s.real() > 0.0) || !std::isfinite(s.real()) || !std::isfinite(s.imag()))
    throw DomainError("gamma0 requires Re s > 0, got s = (" + std::to_string(s.real()) + ", " +
                      std::to_string(s.imag()) + ")");
}

// Stirling correction ln Γ(x) − [(x − 1/2) ln x − x + ln √(2π)], x >= 10.
double stirling_tail(double x) {
  const double x2 = 1.0 / (x * x);
  return (1.0 / x) *
         (1.0 / 12.0 +
          x2 * (-1.0 / 360.0 + x2 * (1.0 / 1260.0 + x2 * (-1.0 / 1680.0 + x2 * (1.0 / 1188.0)))));
}

}  // namespace

complex gamma0_series(complex s) {
  // E₁(s) = −γ − ln s − Σ_{k≥1} (−s)^k / (k·k!)
  complex sum = 0.0;
  complex term = 1.0;  // (−s)^k / k!
  for (int k = 1; k < 200; ++k) {
    term *= -s / static_cast<double>(k);
    const complex add = term / static_cast<double>(k);
    sum += add;
    if (std::abs(add) < 1e-17 * std::max(1.0, std::abs(sum))) break;
  }
  return -kEulerGamma - std::log(s) - sum;
}

complex scaled_gamma0_continued_fraction(complex s) {
  // e^s E₁(s) = 1/(s+1− 1²/(s+3− 2²/(s+5− ...))), modified Lentz.
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  complex b = s + 1.0;
  complex c = 1.0 / tiny;
  complex d = 1.0 / b;
  complex h = d;
  for (int i = 1; i < 1000000; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = a * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const complex delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) return h;
  }
  throw ConvergenceError("continued fraction for E1 did not converge");
}

complex gamma0(complex s) {
  check_half_plane(s);
  if (std::abs(s) < 1.0) return gamma0_series(s);
  return std::exp(-s) * scaled_gamma0_continued_fraction(s);
}

double gamma0(double s) { return gamma0(complex(s, 0.0)).real(); }

complex scaled_gamma0(complex s) {
  check_half_plane(s);
  if (std::abs(s) < 1.0) return std::exp(s) * gamma0_series(s);
  return scaled_gamma0_continued_fraction(s);
}

double log_gamma_ratio(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("log_gamma_ratio requires positive finite arguments");
  if (a == b) return 0.0;
  if (a < 10.0 || b < 10.0) return std::lgamma(a) - std::lgamma(b);
  // (a−½)ln a − (b−½)ln b − (a−b), rearranged to avoid cancellation.
  const double diff = a - b;
  const double main = diff * std::log(a) + (b - 0.5) * std::log1p(diff / b) - diff;
  return main + stirling_tail(a) - stirling_tail(b);
}

}  // namespace ibp::specfun
