#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "doef/database.hpp"

namespace doef {

inline constexpr std::uint32_t kSnapshotVersion = 1;

// Versioned little-endian binary image of a Database, tombstones included.
// save -> load -> save reproduces the same bytes.
void save_snapshot(const Database& db, std::ostream& out);
Database load_snapshot(std::istream& in);

// FNV-1a 64 over the snapshot bytes.
std::uint64_t snapshot_checksum(const Database& db);

// JSON manifest: format version, generation config, population counts and
// checksums.
std::string snapshot_manifest(const Database& db);

// Writes `<path>` (binary) and `<path>.json` (manifest).
void write_snapshot_files(const Database& db, const std::string& path);
// Reads `<path>` and, when present, verifies it against `<path>.json`.
Database read_snapshot_files(const std::string& path);

}  // namespace doef
