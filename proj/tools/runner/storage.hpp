#pragma once

// Binary snapshots and the content-hashed output manifest.
//
// Snapshot layout (little-endian): "KWV1", then M, a (f64), s, m, lmax, N_R (i32), tau (f64),
// then psi and Pi as rows l = lmin..lmax, each row N_R complex values (re, im as f64).

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "kwave/evolver.hpp"

namespace kwave::runner {

namespace fs = std::filesystem;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SnapshotHeader {
  double M = 0.0;
  double a = 0.0;
  int s = 0;
  int m = 0;
  int lmax = 0;
  int n_r = 0;
  double tau = 0.0;
};

struct Snapshot {
  SnapshotHeader header;
  EvolutionState state;
};

void write_snapshot(const fs::path& path, const TeukolskyOperator& op, const EvolutionState& st);
// Throws SnapshotError for a wrong magic, an unknown version or a truncated file.
Snapshot read_snapshot(const fs::path& path);

std::string sha256_file(const fs::path& path);

struct ManifestEntry {
  std::string sha256;
  std::uintmax_t bytes = 0;
};

// manifest.tsv in the run directory: "sha256<TAB>bytes<TAB>relative path" per output.
class Manifest {
 public:
  explicit Manifest(fs::path run_dir);
  // Reads an existing manifest; a missing file gives an empty manifest.
  void load();
  // Hashes the file (relative to the run directory) and saves the manifest atomically.
  void record(const std::string& relative);
  void forget(const std::string& relative);
  bool verify(const std::string& relative) const;
  const std::map<std::string, ManifestEntry>& entries() const { return entries_; }
  fs::path path() const { return dir_ / "manifest.tsv"; }

 private:
  void save() const;
  fs::path dir_;
  std::map<std::string, ManifestEntry> entries_;
};

}  // namespace kwave::runner
