// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// CSV and JSON forms of specs, snapshots and ensemble statistics.
//
// Snapshot CSV, one-type:
//   # ibp-snapshot v1
//   time,m,probability,tail_mass,engine
// Two-type tables add an n column after m; Monte Carlo tables append
// stderr,trajectories.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ibp/core.hpp"
#include "ibp/mc.hpp"

namespace ibp::io {

using json = nlohmann::json;

inline constexpr const char* kSnapshotHeader = "# ibp-snapshot v1";

json to_json(const ProcessSpec& spec);
/// Missing or null fields become nullopt. Throws SchemaMismatch on wrong
/// types and InvalidSpec on an unknown kind; does not validate rates.
ProcessSpec spec_from_json(const json& j);

/// Snapshots sharing one layout, optionally with Monte Carlo error columns.
struct SnapshotTable {
  std::vector<DistributionSnapshot> snapshots;
  /// Per snapshot, the standard error of each entry (Monte Carlo only).
  std::vector<std::vector<double>> stderrs;
  std::uint64_t trajectories = 0;

  bool monte_carlo() const { return trajectories != 0; }
  bool two_type() const { return !snapshots.empty() && snapshots.front().two_type(); }
};

void write_csv(std::ostream& os, const SnapshotTable& table);
/// Throws SchemaMismatch on a missing header, unknown columns or
/// malformed rows.
SnapshotTable read_csv(std::istream& is);

json to_json(const SnapshotTable& table);
SnapshotTable table_from_json(const json& j);

json to_json(const mc::EnsembleStats& stats);
mc::EnsembleStats ensemble_from_json(const json& j);

/// Reads a snapshot table from CSV or JSON (detected from the first byte).
SnapshotTable load_table(const std::filesystem::path& path);

/// Round-trip decimal form used in every CSV field.
std::string format_double(double v);

}  // namespace ibp::io
