#include "kiefer_cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "kiefer/error.hpp"

namespace kiefer::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

bool is_file_safe(std::string_view s) {
  return !s.empty() && s.front() != '.' && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

template <class T>
T parse_unsigned(std::string_view key, std::string_view text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw DomainError("key '" + std::string(key) + "': expected a nonnegative integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw DomainError("config line " + std::to_string(line) + ": " + what);
}

}  // namespace

SuiteConfig RunConfig::suite() const {
  return SuiteConfig{seed, threads, calibration_length, experiments};
}

void validate_config(const RunConfig& config) {
  if (config.threads < 1 || config.threads > 1024) {
    throw DomainError("key 'threads': must lie in [1, 1024]");
  }
  if (config.calibration_length < 1) throw DomainError("key 'calibration_length': must be positive");
  if (config.output_dir.empty() || trim(config.output_dir) != config.output_dir ||
      config.output_dir.find('\n') != std::string::npos) {
    throw DomainError("key 'output_dir': must be nonempty and unpadded");
  }
  std::set<std::string> names;
  for (const auto& e : config.experiments) {
    if (!is_file_safe(e.name)) {
      throw DomainError("experiment name '" + e.name + "': use letters, digits, '_', '-', '.'");
    }
    if (!names.insert(e.name).second) throw DomainError("duplicate experiment name '" + e.name + "'");
    for (const auto& [k, v] : e.params) {
      if (!is_identifier(k)) throw DomainError("experiment '" + e.name + "': bad key '" + k + "'");
      if (v.empty() || trim(v) != v || v.find('\n') != std::string::npos) {
        throw DomainError("experiment '" + e.name + "': key '" + k + "' has an empty or padded value");
      }
    }
    validate_experiment(e);
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::set<std::string> top_seen;
  std::set<std::string> section_seen;
  ExperimentSpec* current = nullptr;
  bool kind_set = false;
  auto close_section = [&](std::size_t line) {
    if (current && !kind_set) fail_at(line, "experiment '" + current->name + "' has no 'kind'");
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail_at(line_no, "unterminated section header");
      const auto inner = trim(line.substr(1, line.size() - 2));
      constexpr std::string_view kPrefix = "experiment";
      if (inner.substr(0, kPrefix.size()) != kPrefix || inner.size() == kPrefix.size() ||
          !std::isspace(static_cast<unsigned char>(inner[kPrefix.size()]))) {
        fail_at(line_no, "expected [experiment <name>]");
      }
      close_section(line_no);
      config.experiments.push_back({std::string(trim(inner.substr(kPrefix.size()))), {}, {}});
      current = &config.experiments.back();
      kind_set = false;
      section_seen.clear();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail_at(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!is_identifier(key)) fail_at(line_no, "bad key '" + key + "'");
    if (value.empty()) fail_at(line_no, "key '" + key + "' has no value");

    try {
      if (!current) {
        if (!top_seen.insert(key).second) fail_at(line_no, "duplicate key '" + key + "'");
        if (key == "seed") {
          config.seed = parse_unsigned<std::uint64_t>(key, value);
        } else if (key == "threads") {
          config.threads = parse_unsigned<unsigned>(key, value);
        } else if (key == "calibration_length") {
          config.calibration_length = parse_unsigned<std::size_t>(key, value);
        } else if (key == "output_dir") {
          config.output_dir = value;
        } else {
          fail_at(line_no, "unknown key '" + key + "'");
        }
      } else {
        if (!section_seen.insert(key).second) fail_at(line_no, "duplicate key '" + key + "'");
        if (key == "kind") {
          current->kind = value;
          kind_set = true;
          allowed_params(value);  // rejects unknown kinds here
        } else {
          current->params[key] = value;
        }
      }
    } catch (const DomainError& e) {
      const std::string what = e.what();
      if (what.rfind("config line", 0) == 0) throw;
      fail_at(line_no, what);
    }
  }
  close_section(line_no);
  validate_config(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const RunConfig& config) {
  std::string out;
  out += "seed = " + std::to_string(config.seed) + "\n";
  out += "threads = " + std::to_string(config.threads) + "\n";
  out += "calibration_length = " + std::to_string(config.calibration_length) + "\n";
  out += "output_dir = " + config.output_dir + "\n";
  for (const auto& e : config.experiments) {
    out += "\n[experiment " + e.name + "]\n";
    out += "kind = " + e.kind + "\n";
    for (const auto& [k, v] : e.params) out += k + " = " + v + "\n";
  }
  return out;
}

}  // namespace kiefer::cli
