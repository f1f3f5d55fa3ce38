#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kiefer/report.hpp"

namespace kiefer::cli {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(std::string_view data);

/// Writes to a temporary sibling, then renames over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Creates `dir` if needed and probes that it is writable. Refuses a
/// directory holding a manifest unless `overwrite`.
void prepare_output_dir(const std::filesystem::path& dir, bool overwrite);

nlohmann::json report_json(const ExperimentReport& report);

/// <name>.json, <name>.statistics.csv and <name>.<table>.csv per table.
/// An empty report writes nothing. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentReport& report,
                                                 const std::filesystem::path& dir);

}  // namespace kiefer::cli
