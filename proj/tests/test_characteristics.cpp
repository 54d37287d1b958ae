// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ibp/characteristics.hpp"
#include "ibp/exact.hpp"
#include "ibp/mastereq.hpp"

using namespace ibp;
using namespace ibp::characteristics;

namespace {

GFQuery query(complex X, complex Y, double T, ProcessSpec spec) {
  GFQuery q;
  q.X = X;
  q.Y = Y;
  q.T = T;
  q.spec = spec;
  return q;
}

}  // namespace

TEST_CASE("normalization at x = y = 1") {
  for (auto spec : {ProcessSpec::two_type(0.25, 1.0, 0.5), ProcessSpec::two_type(0.4, 3.0, 2.0),
                    ProcessSpec::two_type(0.1, 0.2, 1.0)})
    for (double T : {0.3, 2.0, 20.0}) CHECK(std::abs(eval_gf(query(1.0, 1.0, T, spec)) - 1.0) < 1e-14);
}

TEST_CASE("closed form at the origin") {
  const auto spec = ProcessSpec::two_type(0.25, 1.0, 0.5);
  const complex want = std::exp(0.5 * (1 - std::exp(-2.0))) / std::pow(1.0 + 0.5 * 2.0, 2.0);
  CHECK(std::abs(eval_gf(query(0.0, 0.0, 2.0, spec)) - want) < 1e-8);
  CHECK(std::abs(eval_gf_special(query(0.0, 0.0, 2.0, spec)) - want) < 1e-15);
  CHECK(std::abs(eval_gf_special(query(0.0, 0.0, 2.0, spec)).real() - exact::twotype_special_p00(2.0, 0.5)) < 1e-14);
  CHECK(std::abs(eval_gf_special(query(1.0, 1.0, 3.0, spec)) - 1.0) < 1e-15);
  CHECK(std::abs(eval_gf_special(query(1.0, 0.0, 1.0, spec)).real() - exact::twotype_special_pin(0, 1.0, 0.5)) < 1e-14);
}

TEST_CASE("no source means no cells") {
  ProcessSpec spec{ProcessKind::TwoTypeSource, 0.0, 0.3, 2.0};
  CHECK(eval_gf(query(complex(0.3, 0.2), -0.5, 4.0, spec)) == complex(1.0, 0.0));
}

TEST_CASE("numerical and elementary solutions agree on roots of unity") {
  for (double beta : {0.25, 1.0}) {
    const auto spec = ProcessSpec::two_type(0.25, 1.0, beta);
    for (double T : {0.5, 2.0, 8.0}) {
      for (int j = 0; j < 5; ++j) {
        for (int k = 0; k < 5; ++k) {
          const complex X = std::polar(1.0, 2 * std::numbers::pi * j / 5);
          const complex Y = std::polar(1.0, 2 * std::numbers::pi * k / 5);
          auto q = query(X, Y, T, spec);
          CHECK(std::abs(eval_gf(q) - eval_gf_special(q)) < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("query domain") {
  const auto spec = ProcessSpec::two_type(0.3, 2.0, 1.0);
  CHECK_THROWS_AS(eval_gf(query(1.5, 0.0, 1.0, spec)), DomainError);
  CHECK_THROWS_AS(eval_gf_special(query(0.0, 0.0, 1.0, spec)), DomainError);
  CHECK_THROWS_AS(eval_gf(query(0.0, 0.0, 1.0, ProcessSpec::critical())), DomainError);
  GFOptions tight;
  tight.blowup = 0.5;
  CHECK_THROWS_AS(eval_gf(query(0.9, 0.9, 1.0, spec), tight), ConvergenceError);
  CHECK_THROWS_AS(extract_pmn(spec, 1.0, 24, 32), DomainError);
}

TEST_CASE("extraction reproduces the special-case marginals") {
  for (double beta : {0.25, 0.5}) {
    const auto spec = ProcessSpec::two_type(0.25, 1.0, beta);
    for (double T : {1.0, 2.0, 5.0}) {
      auto ex = extract_pmn(spec, T, 64, 64);
      const auto& s = ex.snapshot;
      CHECK(s.engine == Engine::Characteristics);
      CHECK_FALSE(ex.alias_warning);
      CHECK(ex.max_imag < 1e-10);
      CHECK(std::abs(s.at(0, 0) - exact::twotype_special_p00(T, beta)) < 1e-8);
      for (std::size_t m = 0; m <= 20; ++m) {
        double marg = 0.0;
        for (std::size_t n = 0; n < s.cols; ++n) marg += s.at(m, n);
        CHECK(std::abs(marg - exact::twotype_special_pm(static_cast<long>(m), T, beta)) < 1e-6);
      }
      for (std::size_t n = 0; n <= 20; ++n) {
        double marg = 0.0;
        for (std::size_t m = 0; m < s.rows; ++m) marg += s.at(m, n);
        CHECK(std::abs(marg - exact::twotype_special_pin(static_cast<long>(n), T, beta)) < 1e-6);
      }
      CHECK(std::abs(s.total() + s.tail_mass - 1.0) < 1e-8);
      for (double p : s.probs) CHECK(p >= -1e-9);
    }
  }
}

TEST_CASE("general parameters match the master equation") {
  const auto spec = ProcessSpec::two_type(0.3, 2.0, 1.0);
  auto ex = extract_pmn(spec, 1.0, 32, 32);
  mastereq::TruncationPolicy p;
  p.M = 64;
  auto ode = mastereq::integrate(spec, std::vector<double>{1.0}, p).front();
  double dev = 0.0;
  for (std::size_t m = 0; m < 32; ++m)
    for (std::size_t n = 0; n < 32; ++n) dev = std::max(dev, std::abs(ex.snapshot.at(m, n) - ode.at(m, n)));
  CHECK(dev < 1e-5);
}

TEST_CASE("symmetry shortcut and thread count leave results unchanged") {
  const auto spec = ProcessSpec::two_type(0.3, 2.0, 1.0);
  ExtractOptions full;
  full.use_symmetry = false;
  ExtractOptions fast;
  fast.jobs = 4;
  auto a = extract_pmn(spec, 1.5, 16, 16, full);
  auto b = extract_pmn(spec, 1.5, 16, 16, fast);
  CHECK(a.snapshot.probs == b.snapshot.probs);
  CHECK(a.snapshot.tail_mass == b.snapshot.tail_mass);
}

TEST_CASE("small grids raise the alias flag") {
  auto ex = extract_pmn(ProcessSpec::two_type(0.25, 1.0, 2.0), 5.0, 4, 4);
  CHECK(ex.alias_warning);
  CHECK(ex.snapshot.tail_mass > 1e-6);
}

TEST_CASE("sub-unit radius recovers the same coefficients") {
  const auto spec = ProcessSpec::two_type(0.25, 1.0, 0.5);
  ExtractOptions o;
  o.radius_p = o.radius_q = 0.8;
  auto ex = extract_pmn(spec, 1.0, 32, 32, o);
  CHECK(std::abs(ex.snapshot.at(0, 0) - exact::twotype_special_p00(1.0, 0.5)) < 1e-8);
  CHECK(std::abs(ex.snapshot.at(3, 0) - exact::twotype_special_pm0(3, 1.0, 0.5)) < 1e-8);
}
