// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include "ibp/core.hpp"

#include <cmath>
#include <numeric>

namespace ibp {

std::string_view to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::Critical:
      return "Critical";
    case ProcessKind::NoExtinction:
      return "NoExtinction";
    case ProcessKind::Immigration:
      return "Immigration";
    case ProcessKind::TwoTypeSource:
      return "TwoTypeSource";
  }
  return "?";
}

ProcessKind parse_process_kind(std::string_view name) {
  if (name == "Critical" || name == "critical") return ProcessKind::Critical;
  if (name == "NoExtinction" || name == "noext") return ProcessKind::NoExtinction;
  if (name == "Immigration" || name == "immigration") return ProcessKind::Immigration;
  if (name == "TwoTypeSource" || name == "twotype") return ProcessKind::TwoTypeSource;
  throw InvalidSpec("unknown process kind '" + std::string(name) + "'");
}

std::string_view to_string(ValidationCode code) {
  switch (code) {
    case ValidationCode::Ok:
      return "Ok";
    case ValidationCode::NegativeRate:
      return "NegativeRate";
    case ValidationCode::RateOutOfRange:
      return "RateOutOfRange";
    case ValidationCode::MissingParameter:
      return "MissingParameter";
  }
  return "?";
}

namespace {

Validation fail(ValidationCode code, std::string msg) {
  return {code, std::move(msg)};
}

bool bad_number(const std::optional<double>& v) {
  return v && !std::isfinite(*v);
}

}  // namespace

Validation validate(const ProcessSpec& spec) {
  if (bad_number(spec.beta) || bad_number(spec.r) || bad_number(spec.gamma))
    return fail(ValidationCode::RateOutOfRange, "rates must be finite");

  switch (spec.kind) {
    case ProcessKind::Critical:
    case ProcessKind::NoExtinction:
      return {};

    case ProcessKind::Immigration:
      if (!spec.beta) return fail(ValidationCode::MissingParameter, "immigration requires beta");
      if (*spec.beta < 0) return fail(ValidationCode::NegativeRate, "beta must be nonnegative");
      if (*spec.beta == 0)
        return fail(ValidationCode::MissingParameter, "immigration requires beta > 0");
      return {};

    case ProcessKind::TwoTypeSource:
      if (!spec.r) return fail(ValidationCode::MissingParameter, "two-type requires r");
      if (!spec.gamma) return fail(ValidationCode::MissingParameter, "two-type requires gamma");
      if (!spec.beta) return fail(ValidationCode::MissingParameter, "two-type requires beta");
      if (*spec.r < 0 || *spec.gamma < 0 || *spec.beta < 0)
        return fail(ValidationCode::NegativeRate, "two-type rates must be nonnegative");
      if (*spec.r == 0 || *spec.r > 0.5)
        return fail(ValidationCode::RateOutOfRange, "two-type requires 0 < r <= 1/2");
      if (*spec.gamma == 0)
        return fail(ValidationCode::RateOutOfRange, "two-type requires gamma > 0");
      return {};
  }
  return fail(ValidationCode::MissingParameter, "unknown process kind");
}

void require_valid(const ProcessSpec& spec) {
  auto v = validate(spec);
  if (!v) throw InvalidSpec(std::string(to_string(v.code)) + ": " + v.message);
}

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::ClosedForm:
      return "ClosedForm";
    case Engine::MasterEq:
      return "MasterEq";
    case Engine::MonteCarlo:
      return "MonteCarlo";
    case Engine::LaplaceInv:
      return "LaplaceInv";
    case Engine::Characteristics:
      return "Characteristics";
  }
  return "?";
}

Engine parse_engine(std::string_view name) {
  for (auto e : {Engine::ClosedForm, Engine::MasterEq, Engine::MonteCarlo, Engine::LaplaceInv,
                 Engine::Characteristics}) {
    if (to_string(e) == name) return e;
  }
  throw SchemaMismatch("unknown engine '" + std::string(name) + "'");
}

double DistributionSnapshot::at(long m) const {
  const long i = m - origin;
  if (i < 0 || i >= static_cast<long>(probs.size())) return 0.0;
  return probs[static_cast<std::size_t>(i)];
}

double DistributionSnapshot::total() const {
  return std::accumulate(probs.begin(), probs.end(), 0.0);
}

}  // namespace ibp
