// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include "ibp/lapinv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ibp/parallel.hpp"
#include "ibp/specfun.hpp"

namespace ibp::lapinv {

namespace {

void check_query(long m, complex s) {
  if (m < 1) throw DomainError("Laplace queries require m >= 1");
  if (!(s.real() > 0.0)) throw DomainError("Laplace queries require Re s > 0");
}

// Largest index the backward recurrence may start from.
constexpr double kMaxRecurrenceStart = 2e8;

}  // namespace

complex p1_tilde(complex s) {
  check_query(1, s);
  return 1.0 / (s * specfun::scaled_gamma0(s)) - 1.0;
}

complex pm_tilde(long m, complex s, const quad::Options& opt) {
  check_query(m, s);
  const double dm1 = static_cast<double>(m - 1);
  // With η = u/(1−u), η^{m−1}/(1+η)^{m+1} dη = u^{m−1} du.
  auto integrand = [&](double u) -> complex {
    if (u <= 0.0) return m == 1 ? complex(1.0) : complex(0.0);
    if (u >= 1.0) return 0.0;
    const double eta = u / (1.0 - u);
    const complex expo = dm1 * std::log(u) - s * eta;
    if (expo.real() < -745.0) return 0.0;
    return std::exp(expo);
  };

  // Panels: split at the image of η = m, then geometrically in η until the
  // e^{−Re s·η} envelope is negligible.
  std::vector<double> breaks{0.0};
  const double eta_end = 745.0 / s.real();
  for (double eta = static_cast<double>(m); eta < eta_end; eta *= 2.0) {
    breaks.push_back(eta / (1.0 + eta));
    if (breaks.size() > 200) break;
  }
  breaks.push_back(1.0);

  auto res = quad::integrate<complex>(integrand, breaks, opt);
  if (!res.converged)
    throw ConvergenceError("pm_tilde quadrature missed its target: m = " + std::to_string(m) +
                           ", error estimate " + std::to_string(res.error));
  return res.value / (s * specfun::scaled_gamma0(s));
}

std::vector<complex> pm_tilde_recurrence(long m_max, complex s) {
  check_query(m_max, s);
  // The wanted solution decays like exp(−2√(s m)) relative to the dominant
  // one; starting at (√m_max + 14/Re√s)² leaves contamination near e^{−28}
  // at m_max.
  const double re_root = std::sqrt(s).real();
  const double gap = 14.0 / re_root;
  const double start_root = std::sqrt(static_cast<double>(m_max)) + gap;
  const double start = start_root * start_root + 20.0;
  if (!(start < kMaxRecurrenceStart))
    throw ConvergenceError("backward recurrence would need " + std::to_string(start) +
                           " terms for s = (" + std::to_string(s.real()) + ", " +
                           std::to_string(s.imag()) + ")");
  const long n = static_cast<long>(start);

  // ratio[j] = P̃_{j+1}/P̃_j for j = 1..m_max−1, from
  // P̃_j/P̃_{j−1} = (j−1)/((s+2j) − (j+1) P̃_{j+1}/P̃_j).
  std::vector<complex> ratio(static_cast<std::size_t>(m_max) + 1, 0.0);
  complex rho = 0.0;
  for (long j = n; j >= 2; --j) {
    const double dj = static_cast<double>(j);
    rho = (dj - 1.0) / ((s + 2.0 * dj) - (dj + 1.0) * rho);
    if (j - 1 <= m_max) ratio[static_cast<std::size_t>(j - 1)] = rho;
  }
  std::vector<complex> out(static_cast<std::size_t>(m_max) + 1, 0.0);
  out[1] = p1_tilde(s);
  for (long m = 2; m <= m_max; ++m)
    out[static_cast<std::size_t>(m)] =
        out[static_cast<std::size_t>(m - 1)] * ratio[static_cast<std::size_t>(m - 1)];
  return out;
}

complex recurrence_residual(long m, complex s, const std::function<complex(long)>& pm) {
  const double dm = static_cast<double>(m);
  if (m == 1) return (s + 1.0) * pm(1) - 2.0 * pm(2) - 1.0;
  return (s + 2.0 * dm) * pm(m) - (dm - 1.0) * pm(m - 1) - (dm + 1.0) * pm(m + 1);
}

complex moment_tilde(int k, complex s) {
  if (k < 1) throw DomainError("moment_tilde requires k >= 1");
  check_query(1, s);
  const complex p1 = p1_tilde(s);
  std::vector<complex> mt(static_cast<std::size_t>(k) + 1, 0.0);
  for (int order = 1; order <= k; ++order) {
    complex acc = 1.0 + p1;
    double binom = 1.0;  // C(order, 2a), updated incrementally
    for (int a = 1; 2 * a <= order; ++a) {
      binom *= static_cast<double>(order - 2 * a + 2) * (order - 2 * a + 1) /
               (static_cast<double>(2 * a - 1) * (2 * a));
      acc += 2.0 * binom * mt[static_cast<std::size_t>(order - 2 * a + 1)];
    }
    mt[static_cast<std::size_t>(order)] = acc / s;
  }
  return mt[static_cast<std::size_t>(k)];
}

//----------------------------------------------------------------------------

std::vector<complex> inversion_nodes(double t, const InversionParams& p) {
  if (!(t > 0.0)) throw DomainError("inversion requires t > 0");
  if (p.terms < 1 || p.euler < 0 || !(p.A > 0.0))
    throw DomainError("invalid inversion parameters");
  const int count = p.terms + p.euler + 1;
  std::vector<complex> nodes;
  nodes.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    nodes.emplace_back(p.A / (2.0 * t), std::numbers::pi * k / t);
  return nodes;
}

InversionResult euler_sum(const std::vector<complex>& values, double t, const InversionParams& p) {
  const int count = p.terms + p.euler + 1;
  if (static_cast<int>(values.size()) != count)
    throw DomainError("euler_sum: wrong number of node values");
  // partial[n] = Re F(s_0)/2 + Σ_{k=1}^{n} (−1)^k Re F(s_k)
  std::vector<double> partial(static_cast<std::size_t>(count));
  double acc = 0.5 * values[0].real();
  partial[0] = acc;
  for (int k = 1; k < count; ++k) {
    acc += (k % 2 == 0 ? 1.0 : -1.0) * values[static_cast<std::size_t>(k)].real();
    partial[static_cast<std::size_t>(k)] = acc;
  }
  auto euler_average = [&](int n) {
    double sum = 0.0;
    double c = 1.0;
    for (int j = 0; j <= p.euler; ++j) {
      sum += c * partial[static_cast<std::size_t>(n + j)];
      c = c * (p.euler - j) / (j + 1);
    }
    return sum * std::ldexp(1.0, -p.euler);
  };
  const double scale = std::exp(p.A / 2.0) / t;
  InversionResult r;
  r.value = scale * euler_average(p.terms);
  r.last_increment = std::abs(r.value - scale * euler_average(p.terms - 1));
  r.oscillation = scale * std::abs(values.back().real());
  return r;
}

namespace {

void require_converged(const InversionResult& r, const InversionParams& p, const std::string& what) {
  if (!std::isfinite(r.value) || r.last_increment > p.accuracy * std::max(1.0, std::abs(r.value)))
    throw ConvergenceError(what + ": Euler summation did not settle (last increment " +
                           std::to_string(r.last_increment) + ", oscillation amplitude " +
                           std::to_string(r.oscillation) + ")");
}

// Parameter sets of the passes: A alone, or A and A + ln 2.
std::vector<InversionParams> passes(const InversionParams& p) {
  std::vector<InversionParams> out{p};
  if (p.cancel_aliasing) {
    out.push_back(p);
    out.back().A = p.A + std::numbers::ln2;
  }
  return out;
}

// f_A = f + e^{−A} f(3t) + O(e^{−2A}), so 2 f_{A+ln2} − f_A = f + O(e^{−2A}).
InversionResult combine(const std::vector<InversionResult>& r) {
  if (r.size() == 1) return r[0];
  InversionResult c;
  c.value = 2.0 * r[1].value - r[0].value;
  c.last_increment = 2.0 * r[1].last_increment + r[0].last_increment;
  c.oscillation = 2.0 * r[1].oscillation + r[0].oscillation;
  return c;
}

}  // namespace

InversionResult invert_transform(const std::function<complex(complex)>& F, double t,
                                 const InversionParams& p) {
  const auto ps = passes(p);
  std::vector<complex> nodes;
  for (const auto& q : ps) {
    auto n = inversion_nodes(t, q);
    nodes.insert(nodes.end(), n.begin(), n.end());
  }
  std::vector<complex> values(nodes.size());
  parallel_for(nodes.size(), p.jobs, [&](std::size_t i) { values[i] = F(nodes[i]); });
  const std::size_t per = nodes.size() / ps.size();
  std::vector<InversionResult> parts;
  for (std::size_t j = 0; j < ps.size(); ++j) {
    std::vector<complex> v(values.begin() + static_cast<long>(j * per),
                           values.begin() + static_cast<long>((j + 1) * per));
    parts.push_back(euler_sum(v, t, ps[j]));
  }
  auto r = combine(parts);
  require_converged(r, p, "inversion at t = " + std::to_string(t));
  return r;
}

std::vector<InversionResult> invert_range(long m_max, double t, const InversionParams& p) {
  if (m_max < 1) throw DomainError("invert_range requires m_max >= 1");
  const auto ps = passes(p);
  std::vector<complex> nodes;
  for (const auto& q : ps) {
    auto n = inversion_nodes(t, q);
    nodes.insert(nodes.end(), n.begin(), n.end());
  }
  const std::size_t per = nodes.size() / ps.size();
  std::vector<std::vector<complex>> table(nodes.size());
  parallel_for(nodes.size(), p.jobs, [&](std::size_t i) {
    if (p.evaluator == Evaluator::Recurrence) {
      table[i] = pm_tilde_recurrence(m_max, nodes[i]);
    } else {
      table[i].assign(static_cast<std::size_t>(m_max) + 1, 0.0);
      for (long m = 1; m <= m_max; ++m) table[i][static_cast<std::size_t>(m)] = pm_tilde(m, nodes[i]);
    }
  });
  std::vector<InversionResult> out;
  out.reserve(static_cast<std::size_t>(m_max));
  std::vector<complex> values(per);
  for (long m = 1; m <= m_max; ++m) {
    std::vector<InversionResult> parts;
    for (std::size_t j = 0; j < ps.size(); ++j) {
      for (std::size_t i = 0; i < per; ++i) values[i] = table[j * per + i][static_cast<std::size_t>(m)];
      parts.push_back(euler_sum(values, t, ps[j]));
    }
    auto r = combine(parts);
    require_converged(r, p, "P_" + std::to_string(m) + "(" + std::to_string(t) + ")");
    out.push_back(r);
  }
  return out;
}

InversionResult invert(long m, double t, const InversionParams& p) {
  if (m < 1) throw DomainError("invert requires m >= 1");
  if (m == 1) return invert_transform([](complex s) { return p1_tilde(s); }, t, p);
  if (p.evaluator == Evaluator::Quadrature)
    return invert_transform([m](complex s) { return pm_tilde(m, s); }, t, p);
  return invert_range(m, t, p).back();
}

InversionResult invert_moment(int k, double t, const InversionParams& p) {
  return invert_transform([k](complex s) { return moment_tilde(k, s); }, t, p);
}

}  // namespace ibp::lapinv
