#pragma once

// Workflows of the runner. Each writes into a run directory and records every output in
// the manifest; the returned outcome says whether the configured acceptance gates passed.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace kwave::runner {

namespace fs = std::filesystem;

struct RunOutcome {
  bool gates_passed = true;
  std::vector<std::string> messages;  // one line per gate or notable event
  std::vector<std::string> outputs;   // relative paths written
};

// Root for run directories: $KWAVE_OUTPUT_ROOT, or the current directory.
fs::path output_root();

// Column names and values appended to every quantitative row.
std::string provenance_header();
std::string provenance_values(const RunConfig& config);

RunOutcome run_verify(const RunConfig& config, const fs::path& dir);
// resume continues from the newest snapshot whose hash matches the manifest.
RunOutcome run_evolve(const RunConfig& config, const fs::path& dir, bool resume = false);
RunOutcome run_norms(const RunConfig& config, const fs::path& dir);
RunOutcome run_reconstruct(const RunConfig& config, const fs::path& dir);
// Fits the probe CSV (dir/probes.csv unless given) and writes tails.csv.
RunOutcome run_tails(const RunConfig& config, const fs::path& dir,
                     const std::optional<fs::path>& probes = std::nullopt);
// Two-column files under dir/plot from whatever CSVs the run directory holds.
RunOutcome run_plotdata(const fs::path& dir);

// Dispatch on config.schedule.workflow.
RunOutcome run(const RunConfig& config, const fs::path& dir, bool resume = false);

}  // namespace kwave::runner
