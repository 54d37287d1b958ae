// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include "ibp/exact.hpp"

#include <cmath>
#include <string>

#include "ibp/specfun.hpp"

namespace ibp::exact {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw DomainError(what);
}

void check_time(double t) { require(t >= 0.0 && std::isfinite(t), "time must be finite and >= 0"); }

// ln[Γ(m + a) / (Γ(a) Γ(m + 1))], the negative-binomial normalizer.
double log_nb_coefficient(long m, double a) {
  if (m == 0) return 0.0;
  return specfun::log_gamma_ratio(static_cast<double>(m) + a, static_cast<double>(m) + 1.0) -
         std::lgamma(a);
}

// Γ(m+a)/(Γ(a)Γ(m+1)) · q^m · norm, evaluated in log space; q in [0, 1).
double negative_binomial(long m, double a, double log_q, double log_norm) {
  if (m == 0) return std::exp(log_norm);
  if (std::isinf(log_q)) return 0.0;
  return std::exp(log_nb_coefficient(m, a) + static_cast<double>(m) * log_q + log_norm);
}

}  // namespace

double critical_pm(long m, double t) {
  require(m >= 1, "critical_pm requires m >= 1");
  check_time(t);
  if (t == 0.0) return m == 1 ? 1.0 : 0.0;
  const double dm = static_cast<double>(m);
  return std::exp((dm - 1.0) * std::log(t) - (dm + 1.0) * std::log1p(t));
}

TruncatedSum critical_survival_sum(double t, double tail_tol) {
  check_time(t);
  TruncatedSum out;
  const double q = t / (1.0 + t);
  for (long m = 1;; ++m) {
    out.sum += critical_pm(m, t);
    out.terms = m;
    // Σ_{j>m} P_j = q^m / (1+t), exact for the geometric tail.
    out.tail_bound = std::exp(static_cast<double>(m) * std::log(q) - std::log1p(t));
    if (t == 0.0 || out.tail_bound < tail_tol) break;
  }
  if (t == 0.0) out.tail_bound = 0.0;
  return out;
}

MomentSet critical_moments(double t, int k_max) {
  check_time(t);
  require(k_max >= 0, "k_max must be >= 0");
  MomentSet ms;
  ms.time = t;
  ms.values.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  const double closed[3] = {1.0 / (1.0 + t), 1.0, 1.0 + 2.0 * t};
  for (int k = 0; k <= std::min(k_max, 2); ++k) ms.values[static_cast<std::size_t>(k)] = closed[k];
  if (k_max <= 2) return ms;

  if (t == 0.0) {
    for (auto& v : ms.values) v = 1.0;
    return ms;
  }
  const double q = t / (1.0 + t);
  for (int k = 3; k <= k_max; ++k) {
    double sum = 0.0;
    double bound = 0.0;
    for (long m = 1;; ++m) {
      const double dm = static_cast<double>(m);
      sum += std::pow(dm, k) * critical_pm(m, t);
      // Tail Σ_{j>m} j^k P_j bounded by a geometric series with ratio ρ.
      const double rho = std::pow((dm + 2.0) / (dm + 1.0), k) * q;
      if (rho < 1.0) {
        bound = std::pow(dm + 1.0, k) * critical_pm(m + 1, t) / (1.0 - rho);
        if (bound < 1e-12 * sum) break;
      }
    }
    ms.values[static_cast<std::size_t>(k)] = sum;
    if (k == k_max) ms.truncation_bound = bound;
  }
  return ms;
}

double immigration_pm(long m, double t, double beta) {
  require(m >= 1, "immigration_pm requires m >= 1");
  check_time(t);
  require(beta > 0.0 && std::isfinite(beta), "immigration_pm requires beta > 0");
  if (t == 0.0) return m == 1 ? 1.0 : 0.0;
  // Mortal cells k = m − 1 are negative binomial with shape β, q = t/(1+t).
  const long k = m - 1;
  const double log_q = std::log(t) - std::log1p(t);
  return negative_binomial(k, beta, log_q, -beta * std::log1p(t));
}

TruncatedSum immigration_normalization(double t, double beta, double tail_tol) {
  check_time(t);
  TruncatedSum out;
  const double q = t / (1.0 + t);
  for (long m = 1;; ++m) {
    out.sum += immigration_pm(m, t, beta);
    out.terms = m;
    if (t == 0.0) break;
    // P_{j+1}/P_j = (j−1+β)/j · q; for j > m this is at most
    // ρ = q·max(1, (m+β)/(m+1)).
    const double dm = static_cast<double>(m);
    const double rho = q * std::max(1.0, (dm + beta) / (dm + 1.0));
    if (rho < 1.0) {
      out.tail_bound = immigration_pm(m + 1, t, beta) / (1.0 - rho);
      if (out.tail_bound < tail_tol) break;
    }
  }
  return out;
}

ScalingPoint immigration_scaling(double mu, double beta) {
  require(mu > 0.0 && std::isfinite(mu), "immigration_scaling requires mu > 0");
  require(beta > 0.0, "immigration_scaling requires beta > 0");
  const double log_phi = (beta - 1.0) * std::log(mu) - mu - std::lgamma(beta);
  return {mu, std::exp(log_phi)};
}

double immigration_moments(double t, int k, double beta) {
  check_time(t);
  require(k >= 0, "moment order must be >= 0");
  require(beta > 0.0, "beta must be > 0");
  if (k == 0) return 1.0;
  return std::pow(t, k) * std::exp(specfun::log_gamma_ratio(beta + k, beta));
}

double noext_small_m_asymptote(long m, double t) {
  require(m >= 1, "m must be >= 1");
  require(t > 1.0, "asymptote requires t > 1");
  return 1.0 / (static_cast<double>(m) * std::log(t));
}

double noext_scaling_pm(double m, double t) {
  require(m > 0.0, "m must be positive");
  require(t > 1.0, "scaling form requires t > 1");
  return std::exp(-m / t) / (m * std::log(t));
}

double noext_moment_asymptote(double t, int k) {
  require(t > 1.0, "asymptote requires t > 1");
  require(k >= 1, "moment order must be >= 1");
  return std::exp(std::lgamma(static_cast<double>(k)) + k * std::log(t)) / std::log(t);
}

double twotype_special_pm(long m, double t, double beta) {
  require(m >= 0, "m must be >= 0");
  check_time(t);
  require(beta > 0.0, "beta must be > 0");
  if (t == 0.0) return m == 0 ? 1.0 : 0.0;
  const double a = 4.0 * beta;
  const double log_q = std::log(t / 4.0) - std::log1p(t / 4.0);
  return negative_binomial(m, a, log_q, -a * std::log1p(t / 4.0));
}

double twotype_special_pm0(long m, double t, double beta) {
  require(m >= 0, "m must be >= 0");
  check_time(t);
  require(beta > 0.0, "beta must be > 0");
  if (t == 0.0) return m == 0 ? 1.0 : 0.0;
  const double a = 4.0 * beta;
  const double source = beta * (-std::expm1(-t));
  const double log_q = std::log(t / 4.0) - std::log1p(t / 2.0);
  return negative_binomial(m, a, log_q, source - a * std::log1p(t / 2.0));
}

double twotype_special_p00(double t, double beta) { return twotype_special_pm0(0, t, beta); }

double twotype_special_no_postmitotic(double t, double beta) {
  check_time(t);
  require(beta > 0.0, "beta must be > 0");
  return std::exp(beta * (-std::expm1(-t)) - 4.0 * beta * std::log1p(t / 4.0));
}

double twotype_special_pin(long n, double t, double beta) {
  require(n >= 0, "n must be >= 0");
  check_time(t);
  require(beta > 0.0, "beta must be > 0");
  const double a = beta * (-std::expm1(-t));
  double sum = 0.0;
  double coeff = 1.0;  // (−a)^k / k!
  for (long k = 0; k <= n; ++k) {
    if (k > 0) coeff *= -a / static_cast<double>(k);
    sum += coeff * twotype_special_pm(n - k, t, beta);
  }
  return std::exp(a) * sum;
}

DistributionSnapshot critical_snapshot(double t, long m_max) {
  require(m_max >= 1, "m_max must be >= 1");
  DistributionSnapshot s;
  s.time = t;
  s.engine = Engine::ClosedForm;
  s.origin = 1;
  s.probs.reserve(static_cast<std::size_t>(m_max));
  for (long m = 1; m <= m_max; ++m) s.probs.push_back(critical_pm(m, t));
  s.tail_mass =
      t == 0.0 ? 0.0
               : std::exp(static_cast<double>(m_max) * (std::log(t) - std::log1p(t)) - std::log1p(t));
  s.absorbed_mass = t / (1.0 + t);
  s.tolerance = 1e-15;
  return s;
}

DistributionSnapshot immigration_snapshot(double t, double beta, long m_max) {
  require(m_max >= 1, "m_max must be >= 1");
  DistributionSnapshot s;
  s.time = t;
  s.engine = Engine::ClosedForm;
  s.origin = 1;
  s.probs.reserve(static_cast<std::size_t>(m_max));
  double sum = 0.0;
  for (long m = 1; m <= m_max; ++m) {
    s.probs.push_back(immigration_pm(m, t, beta));
    sum += s.probs.back();
  }
  s.tail_mass = std::max(0.0, 1.0 - sum);
  s.tolerance = 1e-14;
  return s;
}

}  // namespace ibp::exact
