// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "preim/bench.hpp"
#include "preim/rom.hpp"

namespace preim {

inline constexpr int kArchiveFormatVersion = 1;

using Manifest = std::map<std::string, std::string>;

/// A reduced model read back from disk. The mesh-sized payloads (basis and
/// interpolation functions) are only present when explicitly requested.
struct RomArchive {
  Manifest manifest;
  ReducedOperators ops;
  std::vector<std::size_t> points;
  std::optional<Matrix> basis;
  std::optional<Matrix> q;

  const std::string& value(const std::string& key) const;
  double number(const std::string& key) const;
};

/// Case description entries (case, kappa0, phi_e, u0, u_m, omega, p_min, p_max, refine).
Manifest case_manifest(const CaseConfig& config);

/// Writes the archive; shape entries (N, M, K, grid_mode, format_version) are
/// added to `manifest`.
void save_archive(const std::filesystem::path& dir, const ReducedModel& rom, Manifest manifest);
RomArchive load_archive(const std::filesystem::path& dir, bool with_basis = false);

/// Case parameters recorded in the manifest, sufficient to rebuild Gamma.
CaseConfig archive_case(const RomArchive& archive);

}  // namespace preim
