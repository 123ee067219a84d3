#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "resbox/config.hpp"

namespace resbox {

/// In-memory CSV: header comment lines, a column row, then data rows.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  [[nodiscard]] std::string render(const std::vector<std::string>& comments) const;
};

/// `# resonance-box v<version> config-hash=<hex>` followed by the canonical
/// config echoed as comments.
std::vector<std::string> output_header(const RunConfig& config, bool timestamp = false);

const std::vector<std::string_view>& command_names();

/// Tables produced by `command`, keyed by output file stem.
std::vector<std::pair<std::string, CsvTable>> compute_command(const RunConfig& config,
                                                             std::string_view command,
                                                             unsigned jobs = 1);

/// Runs `command` and writes one CSV per table into `out_dir` (created when
/// missing). Returns the written paths.
std::vector<std::filesystem::path> run_command(const RunConfig& config, std::string_view command,
                                               const std::filesystem::path& out_dir,
                                               unsigned jobs = 1, bool timestamp = false);

/// Process exit code for an error: 2 config, 3 domain, 4 numerical,
/// 5 search / regime / refinement / study, 1 anything else.
int exit_code_for(const std::exception& error);

}  // namespace resbox
