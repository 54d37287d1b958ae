// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ibp {

inline constexpr const char* kVersion = "0.1.0";

//----------------------------------------------------------------------------
// Errors. Every engine throws a subclass of ibp::Error; the CLI maps them to
// exit code 3.
//----------------------------------------------------------------------------
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public Error {
 public:
  using Error::Error;
};

class StiffnessError : public Error {
 public:
  using Error::Error;
};

class PrecisionError : public Error {
 public:
  using Error::Error;
};

class ResourceError : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

//----------------------------------------------------------------------------
// Process taxonomy
//----------------------------------------------------------------------------
enum class ProcessKind { Critical, NoExtinction, Immigration, TwoTypeSource };

std::string_view to_string(ProcessKind kind);
/// Accepts the long names ("Critical") and the CLI short names ("critical",
/// "noext", "immigration", "twotype").
ProcessKind parse_process_kind(std::string_view name);

/// Which process to run and its rates. Critical and NoExtinction are
/// parameterless (birth = death = 1). Absent parameters stay nullopt and are
/// reported by validate() as MissingParameter when required.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::Critical;
  std::optional<double> beta;
  std::optional<double> r;
  std::optional<double> gamma;

  static ProcessSpec critical() { return {ProcessKind::Critical, {}, {}, {}}; }
  static ProcessSpec no_extinction() {
    return {ProcessKind::NoExtinction, {}, {}, {}};
  }
  static ProcessSpec immigration(double beta) {
    return {ProcessKind::Immigration, beta, {}, {}};
  }
  static ProcessSpec two_type(double r, double gamma, double beta) {
    return {ProcessKind::TwoTypeSource, beta, r, gamma};
  }

  bool is_two_type() const { return kind == ProcessKind::TwoTypeSource; }
  /// Smallest population index reported in snapshots.
  int support_origin() const { return is_two_type() ? 0 : 1; }

  double beta_or(double fallback) const { return beta.value_or(fallback); }

  friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;
};

enum class ValidationCode { Ok, NegativeRate, RateOutOfRange, MissingParameter };

struct Validation {
  ValidationCode code = ValidationCode::Ok;
  std::string message;

  bool ok() const { return code == ValidationCode::Ok; }
  explicit operator bool() const { return ok(); }
};

std::string_view to_string(ValidationCode code);

Validation validate(const ProcessSpec& spec);
/// Throws InvalidSpec carrying the validation message.
void require_valid(const ProcessSpec& spec);

//----------------------------------------------------------------------------
// Result types
//----------------------------------------------------------------------------
enum class Engine { ClosedForm, MasterEq, MonteCarlo, LaplaceInv, Characteristics };

std::string_view to_string(Engine engine);
Engine parse_engine(std::string_view name);

/// Probability vector at a fixed time.
///
/// One-type: probs[i] is the probability of population origin + i, with
/// origin = 1. Two-type: probs is a row-major (m, n) grid of shape
/// rows x cols starting at (0, 0).
struct DistributionSnapshot {
  double time = 0.0;
  std::vector<double> probs;
  double tail_mass = 0.0;
  Engine engine = Engine::ClosedForm;
  int origin = 1;
  std::size_t rows = 0;  // two-type only
  std::size_t cols = 0;  // two-type only
  /// Mass absorbed in the extinct state (Critical only).
  double absorbed_mass = 0.0;
  /// Magnitude of small negative entries clamped to zero.
  double clamped_mass = 0.0;
  /// Tolerance the producing engine claims for individual entries.
  double tolerance = 0.0;

  bool two_type() const { return cols != 0; }
  double at(long m) const;
  double at(std::size_t m, std::size_t n) const { return probs[m * cols + n]; }
  double total() const;
  long max_index() const { return origin + static_cast<long>(probs.size()) - 1; }
};

struct MomentSet {
  double time = 0.0;
  /// values[k] = <m^k>, k = 0..k_max.
  std::vector<double> values;
  /// Optional standard errors (same length as values when present).
  std::vector<double> stderrs;
  /// Upper bound on the truncation error of the highest moment.
  double truncation_bound = 0.0;

  std::size_t k_max() const { return values.empty() ? 0 : values.size() - 1; }
};

/// Euler's constant.
inline constexpr double kEulerGamma = 0.57721566490153286061;

}  // namespace ibp
