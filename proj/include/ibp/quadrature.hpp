// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Globally adaptive 7/15-point Gauss–Kronrod quadrature for real- or
// complex-valued integrands on finite intervals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace ibp::quad {

template <typename T>
struct Result {
  T value{};
  double error = 0.0;
  /// ∫|f|, the scale used for the relative stopping rule.
  double abs_integral = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

struct Options {
  /// Error target relative to ∫|f|.
  double mass_tol = 1e-13;
  /// Error target relative to |∫f|.
  double rel_tol = 1e-12;
  std::size_t max_intervals = 4000;
};

namespace detail {

// Kronrod abscissae on [0, 1]; odd indices are the Gauss nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467768170080,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Panel {
  double a, b;
  T value;
  double error;
  double abs_value;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename T, typename F>
Panel<T> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = fc * kWgk[7];
  T gauss = fc * kWg[3];
  double absk = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const T f1 = f(c - dx);
    const T f2 = f(c + dx);
    kron += (f1 + f2) * kWgk[j];
    absk += (std::abs(f1) + std::abs(f2)) * kWgk[j];
    if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h), absk * std::abs(h)};
}

}  // namespace detail

/// Integrates f over [a, b] with the panels in `breaks` (ascending, including
/// both ends) as the initial partition.
template <typename T, typename F>
Result<T> integrate(F f, const std::vector<double>& breaks, const Options& opt = {}) {
  using Panel = detail::Panel<T>;
  std::priority_queue<Panel> heap;
  T total{};
  double err = 0.0;
  double abs_total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    Panel p = detail::gk15<T>(f, breaks[i], breaks[i + 1]);
    total += p.value;
    err += p.error;
    abs_total += p.abs_value;
    heap.push(p);
  }
  Result<T> out;
  auto done = [&] {
    return err <= std::max(opt.mass_tol * abs_total, opt.rel_tol * std::abs(total));
  };
  while (!heap.empty() && !done() && heap.size() < opt.max_intervals) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    Panel left = detail::gk15<T>(f, worst.a, mid);
    Panel right = detail::gk15<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    abs_total += left.abs_value + right.abs_value - worst.abs_value;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift from incremental updates.
  out.value = T{};
  out.error = 0.0;
  out.abs_integral = 0.0;
  out.intervals = heap.size();
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const auto& p : panels) {
    out.value += p.value;
    out.error += p.error;
    out.abs_integral += p.abs_value;
  }
  out.converged =
      out.error <= std::max(opt.mass_tol * out.abs_integral, opt.rel_tol * std::abs(out.value));
  return out;
}

}  // namespace ibp::quad
