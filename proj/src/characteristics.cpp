// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include "ibp/characteristics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "ibp/parallel.hpp"

namespace ibp::characteristics {

namespace {

void check_query(const GFQuery& q) {
  require_valid(q.spec);
  if (!q.spec.is_two_type()) throw DomainError("generating functions are defined for the two-type process");
  if (!(q.T >= 0.0) || !std::isfinite(q.T)) throw DomainError("T must be finite and >= 0");
  constexpr double slack = 1.0 + 1e-12;
  if (std::abs(q.X) > slack || std::abs(q.Y) > slack) throw DomainError("|X| and |Y| must not exceed 1");
}

bool is_power_of_two(long v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

complex eval_gf(const GFQuery& q, const GFOptions& opt) {
  check_query(q);
  const double beta = *q.spec.beta, r = *q.spec.r, gamma = *q.spec.gamma;
  if (q.T == 0.0 || beta == 0.0) return 1.0;
  const complex Ym1 = q.Y - 1.0;
  const double T = q.T;
  // State: x re, x im, ∫(x−1) re, ∫(x−1) im.
  ode::Rhs f = [&](double t, std::span<const double> s, std::span<double> d) {
    const complex x(s[0], s[1]);
    const complex y = 1.0 + Ym1 * std::exp(gamma * (t - T));
    const complex dx = x * (1.0 - y) - r * (x - y) * (x - y);
    d[0] = dx.real();
    d[1] = dx.imag();
    d[2] = s[0] - 1.0;
    d[3] = s[1];
  };
  const double limit = opt.blowup;
  ode::StepHook guard = [&](double t, std::vector<double>& s) {
    if (std::hypot(s[0], s[1]) > limit)
      throw ConvergenceError("characteristic left |x| <= " + std::to_string(limit) + " at t = " + std::to_string(t));
  };
  std::vector<double> s{q.X.real(), q.X.imag(), 0.0, 0.0};
  ode::DormandPrince45 dp(opt.tolerances);
  dp.integrate(f, T, 0.0, s, guard);
  // s[2..3] now hold −∫₀^T (x−1) dt.
  return std::exp(-beta * complex(s[2], s[3]));
}

complex eval_gf_special(const GFQuery& q) {
  check_query(q);
  if (*q.spec.r != 0.25 || *q.spec.gamma != 1.0)
    throw DomainError("the elementary solution requires r = 1/4 and gamma = 1");
  const double beta = *q.spec.beta;
  const double T = q.T;
  const complex num = std::exp(beta * (-std::expm1(-T)) * (1.0 - q.Y));
  const complex den = std::pow(1.0 + T / 4.0 * (2.0 - q.X - q.Y), 4.0 * beta);
  return num / den;
}

std::string fft_backend_version() { return fftw_version; }

Extraction extract_pmn(const ProcessSpec& spec, double T, long M_p, long M_q, const ExtractOptions& opt) {
  require_valid(spec);
  if (!spec.is_two_type()) throw DomainError("extract_pmn requires the two-type process");
  if (!is_power_of_two(M_p) || !is_power_of_two(M_q)) throw DomainError("grid sizes must be powers of two");
  if (!(opt.radius_p > 0.0 && opt.radius_p <= 1.0 && opt.radius_q > 0.0 && opt.radius_q <= 1.0))
    throw DomainError("sampling radii must lie in (0, 1]");

  const long Lp = 2 * M_p, Lq = 2 * M_q;
  const auto Lpz = static_cast<std::size_t>(Lp), Lqz = static_cast<std::size_t>(Lq);
  // Node angles use signed indices so that conjugate nodes are exact mirrors.
  auto node = [](long j, long L, double rho) {
    const long js = j <= L / 2 ? j : j - L;
    if (js == 0) return complex(rho, 0.0);
    if (2 * js == L) return complex(-rho, 0.0);
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(js) / static_cast<double>(L);
    return complex(rho * std::cos(theta), rho * std::sin(theta));
  };
  auto mirror = [&](std::size_t idx) {
    const std::size_t j = idx / Lqz, k = idx % Lqz;
    return ((Lpz - j) % Lpz) * Lqz + (Lqz - k) % Lqz;
  };

  std::vector<complex> values(Lpz * Lqz);
  std::vector<std::size_t> todo;
  for (std::size_t idx = 0; idx < values.size(); ++idx)
    if (!opt.use_symmetry || idx <= mirror(idx)) todo.push_back(idx);

  parallel_for(todo.size(), opt.jobs, [&](std::size_t i) {
    const std::size_t idx = todo[i];
    GFQuery q;
    q.spec = spec;
    q.T = T;
    q.X = node(static_cast<long>(idx / Lqz), Lp, opt.radius_p);
    q.Y = node(static_cast<long>(idx % Lqz), Lq, opt.radius_q);
    values[idx] = eval_gf(q, opt.gf);
  });
  if (opt.use_symmetry)
    for (std::size_t idx : todo) values[mirror(idx)] = std::conj(values[idx]);

  // c_{m,n} = (1/(Lp Lq)) Σ_{j,k} 𝒫(x_j, y_k) e^{−2πi(jm/Lp + kn/Lq)} / (ρ_p^m ρ_q^n).
  static_assert(sizeof(fftw_complex) == sizeof(complex));
  std::vector<complex> coeff(values.size());
  auto* in = reinterpret_cast<fftw_complex*>(values.data());
  auto* out = reinterpret_cast<fftw_complex*>(coeff.data());
  std::unique_ptr<fftw_plan_s, decltype(&fftw_destroy_plan)> plan(
      fftw_plan_dft_2d(static_cast<int>(Lp), static_cast<int>(Lq), in, out, FFTW_FORWARD, FFTW_ESTIMATE),
      &fftw_destroy_plan);
  if (!plan) throw ResourceError("FFTW could not create a plan");
  fftw_execute(plan.get());

  const double norm = static_cast<double>(Lp) * static_cast<double>(Lq);
  Extraction ex;
  auto& snap = ex.snapshot;
  snap.time = T;
  snap.engine = Engine::Characteristics;
  snap.origin = 0;
  snap.rows = static_cast<std::size_t>(M_p);
  snap.cols = static_cast<std::size_t>(M_q);
  snap.probs.resize(snap.rows * snap.cols);
  double total = 0.0, inner = 0.0;
  for (std::size_t m = 0; m < Lpz; ++m) {
    const double sp = std::pow(opt.radius_p, -static_cast<double>(m));
    for (std::size_t n = 0; n < Lqz; ++n) {
      const complex c = coeff[m * Lqz + n] / norm * sp * std::pow(opt.radius_q, -static_cast<double>(n));
      total += c.real();
      if (m < snap.rows && n < snap.cols) {
        snap.probs[m * snap.cols + n] = c.real();
        inner += c.real();
        ex.max_imag = std::max(ex.max_imag, std::abs(c.imag()));
      }
    }
  }
  // With unit radii the full transform sums to 𝒫(1, 1) = 1 exactly; the
  // outer region estimates the mass beyond the reported block.
  snap.tail_mass = std::max(0.0, total - inner);
  snap.tolerance = 1e-10;
  ex.alias_warning = snap.tail_mass > 1e-6;
  if (ex.max_imag > 1e-10)
    throw ConvergenceError("extracted coefficients carry imaginary parts up to " + std::to_string(ex.max_imag));
  return ex;
}

}  // namespace ibp::characteristics
