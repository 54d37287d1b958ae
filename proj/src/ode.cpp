// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include "ibp/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "ibp/core.hpp"

namespace ibp::ode {

namespace {

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// b − b̂
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double max_norm_ratio(std::span<const double> err, std::span<const double> y0,
                      std::span<const double> y1, const Tolerances& tol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double sc = tol.abs + tol.rel * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / sc);
  }
  return worst;
}

bool step_underflow(double h, double t) {
  return std::abs(h) < 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
}

}  // namespace

double DormandPrince45::initial_step(const Rhs& f, double t0, double dir,
                                     std::span<const double> y, std::span<const double> f0) {
  double d0 = 0.0, d1 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double sc = tol_.abs + tol_.rel * std::abs(y[i]);
    d0 = std::max(d0, std::abs(y[i]) / sc);
    d1 = std::max(d1, std::abs(f0[i]) / sc);
  }
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  std::vector<double> y1(y.size()), f1(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y1[i] = y[i] + dir * h0 * f0[i];
  f(t0 + dir * h0, y1, f1);
  ++stats_.rhs_evals;
  double d2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double sc = tol_.abs + tol_.rel * std::abs(y[i]);
    d2 = std::max(d2, std::abs(f1[i] - f0[i]) / sc);
  }
  d2 /= h0;
  const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d1, d2), 0.2);
  return std::min(100.0 * h0, h1);
}

void DormandPrince45::integrate(const Rhs& f, double t0, double t1, std::vector<double>& y,
                                const StepHook& hook) {
  if (t1 == t0) return;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

  f(t0, y, k1);
  ++stats_.rhs_evals;
  double h = h_ > 0.0 ? h_ : initial_step(f, t0, dir, y, k1);
  double t = t0;
  std::size_t steps = 0;
  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0;

  while (dir * (t1 - t) > 0.0) {
    if (++steps > max_steps_) throw StiffnessError("Dormand-Prince step budget exhausted");
    bool last = false;
    if (dir * (t + dir * h - t1) >= 0.0) {
      h = std::abs(t1 - t);
      last = true;
    }
    if (step_underflow(h, t))
      throw StiffnessError("step size underflow at t = " + std::to_string(t));
    const double hs = dir * h;

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    f(t + c2 * hs, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * hs, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * hs, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * hs, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] =
          y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(t + hs, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] =
          y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(t + hs, ynew, k7);
    stats_.rhs_evals += 6;
    for (std::size_t i = 0; i < n; ++i)
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    const double ratio = max_norm_ratio(err, y, ynew, tol_);
    if (ratio <= 1.0 && std::isfinite(ratio)) {
      ++stats_.accepted;
      t = last ? t1 : t + hs;
      y.swap(ynew);
      k1.swap(k7);
      const double fac = ratio == 0.0 ? fac_max : safety * std::pow(ratio, -0.2);
      const double hnext = h * std::clamp(fac, fac_min, fac_max);
      if (last) h_ = hnext;
      else h = hnext;
      if (hook) {
        hook(t, y);
        if (y.size() != n) {
          n = y.size();
          for (auto* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &ytmp, &ynew, &err}) v->resize(n);
          f(t, y, k1);
          ++stats_.rhs_evals;
        }
      }
    } else {
      ++stats_.rejected;
      const double fac = std::isfinite(ratio) ? safety * std::pow(ratio, -0.25) : fac_min;
      h *= std::clamp(fac, fac_min, 1.0);
    }
  }
}

//----------------------------------------------------------------------------

void BirthDeathGenerator::apply(std::span<const double> p, std::span<double> out) const {
  const std::size_t n = birth.size();
  for (std::size_t i = 0; i < n; ++i) {
    double v = -(birth[i] + death[i]) * p[i];
    if (i > 0) v += birth[i - 1] * p[i - 1];
    if (i + 1 < n) v += death[i + 1] * p[i + 1];
    out[i] = v;
  }
}

void BirthDeathGenerator::solve_shifted(double c, std::span<double> x) const {
  // Row i: −c b_{i−1} x_{i−1} + (1 + c(b_i + d_i)) x_i − c d_{i+1} x_{i+1} = rhs_i
  const std::size_t n = birth.size();
  thread_local std::vector<double> cprime;
  cprime.resize(n);
  double diag = 1.0 + c * (birth[0] + death[0]);
  double upper = n > 1 ? -c * death[1] : 0.0;
  cprime[0] = upper / diag;
  x[0] /= diag;
  for (std::size_t i = 1; i < n; ++i) {
    const double lower = -c * birth[i - 1];
    diag = 1.0 + c * (birth[i] + death[i]);
    upper = i + 1 < n ? -c * death[i + 1] : 0.0;
    const double m = diag - lower * cprime[i - 1];
    cprime[i] = upper / m;
    x[i] = (x[i] - lower * x[i - 1]) / m;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime[i] * x[i + 1];
}

//----------------------------------------------------------------------------

namespace {

// Hairer & Wanner SDIRK4 (stiffly accurate), γ = 1/4.
constexpr double kGamma = 0.25;
constexpr std::array<std::array<double, 4>, 5> kA = {{
    {0.0, 0.0, 0.0, 0.0},
    {1.0 / 2, 0.0, 0.0, 0.0},
    {17.0 / 50, -1.0 / 25, 0.0, 0.0},
    {371.0 / 1360, -137.0 / 2720, 15.0 / 544, 0.0},
    {25.0 / 24, -49.0 / 48, 125.0 / 16, -85.0 / 12},
}};
// b − b̂ (b is the last row of A with γ appended; b̂ is the order-3 embedding).
constexpr std::array<double, 5> kErr = {25.0 / 24 - 59.0 / 48, -49.0 / 48 + 17.0 / 96,
                                        125.0 / 16 - 225.0 / 32, 0.0, 1.0 / 4};

}  // namespace

void Sdirk4::integrate(const BirthDeathGenerator& gen, double t0, double t1,
                       std::vector<double>& y, const StepHook& hook) {
  if (!(t1 > t0)) return;
  std::size_t n = y.size();
  std::array<std::vector<double>, 5> k;
  std::vector<double> stage(n), err(n), ynew(n);
  for (auto& v : k) v.resize(n);

  double h = h_ > 0.0 ? h_ : std::min(1e-4, t1 - t0);
  double t = t0;
  std::size_t steps = 0;
  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 5.0;

  while (t1 - t > 0.0) {
    if (++steps > max_steps_) throw StiffnessError("SDIRK step budget exhausted");
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    if (step_underflow(h, t))
      throw StiffnessError("step size underflow at t = " + std::to_string(t));

    const double ch = kGamma * h;
    for (std::size_t s = 0; s < 5; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double v = y[i];
        for (std::size_t j = 0; j < s; ++j) v += h * kA[s][j] * k[j][i];
        stage[i] = v;
      }
      gen.solve_shifted(ch, stage);
      gen.apply(stage, k[s]);
      ++stats_.rhs_evals;
    }
    // Stiffly accurate: the solution is the last stage value.
    ynew.assign(stage.begin(), stage.end());
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (std::size_t s = 0; s < 5; ++s) e += kErr[s] * k[s][i];
      err[i] = h * e;
    }
    // Filter the estimate through (I − γhG)^{-1} so stiff modes do not force
    // spurious rejections.
    gen.solve_shifted(ch, err);

    const double ratio = max_norm_ratio(err, y, ynew, tol_);
    if (ratio <= 1.0 && std::isfinite(ratio)) {
      ++stats_.accepted;
      t = last ? t1 : t + h;
      y.swap(ynew);
      const double fac = ratio == 0.0 ? fac_max : safety * std::pow(ratio, -0.25);
      const double hnext = h * std::clamp(fac, fac_min, fac_max);
      if (last) h_ = hnext;
      else h = hnext;
      if (hook) {
        hook(t, y);
        if (y.size() != n) {
          n = y.size();
          for (auto& v : k) v.resize(n);
          stage.resize(n);
          err.resize(n);
          ynew.resize(n);
          if (gen.size() != n) throw DomainError("generator size does not match the state");
        }
      }
    } else {
      ++stats_.rejected;
      const double fac = std::isfinite(ratio) ? safety * std::pow(ratio, -0.25) : fac_min;
      h *= std::clamp(fac, fac_min, 1.0);
    }
  }
}

}  // namespace ibp::ode
