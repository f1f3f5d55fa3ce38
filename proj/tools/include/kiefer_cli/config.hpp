#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kiefer/experiments.hpp"

namespace kiefer::cli {

// Plain-text run configuration:
//
//   # comment
//   seed = 7
//   threads = 1
//   calibration_length = 1000000
//   output_dir = out
//
//   [experiment iid_clt]
//   kind = clt
//   process = iid
//   n = 2^14
//
// Top-level keys come before the first section. Each section is one
// experiment; its keys other than `kind` are the parameters of that kind.
struct RunConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t calibration_length = 1'000'000;
  std::string output_dir = "kiefer-out";
  std::vector<ExperimentSpec> experiments;

  bool operator==(const RunConfig&) const = default;
  SuiteConfig suite() const;
};

/// Parses and validates; errors name the line and the offending key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
std::string render_config(const RunConfig& config);

/// Throws DomainError naming the first bad key or value.
void validate_config(const RunConfig& config);

}  // namespace kiefer::cli
