#include "kiefer_cli/command.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>
#include <openssl/crypto.h>

#include "kiefer/error.hpp"
#include "kiefer/experiments.hpp"
#include "kiefer_cli/config.hpp"
#include "kiefer_cli/outputs.hpp"

#ifndef KIEFER_VERSION
#define KIEFER_VERSION "unknown"
#endif

namespace kiefer::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t calibration_length = 1'000'000;
  std::string out = "kiefer-out";
  std::string name;
  bool overwrite = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* calibration_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

struct Subcommand {
  CLI::App* app = nullptr;
  std::vector<std::string> kinds;
  Common common;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string mode;
};

void add_common(CLI::App* app, Common& c, bool with_name) {
  c.seed_opt = app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  c.threads_opt = app->add_option("--threads", c.threads, "Worker threads")->capture_default_str();
  c.calibration_opt = app->add_option("--calibration-length", c.calibration_length,
                                      "Length of the trajectory the centering ECDF is fitted on")
                          ->capture_default_str();
  c.out_opt = app->add_option("--out", c.out, "Output directory (KIEFER_OUTPUT_DIR overrides)")
                  ->capture_default_str();
  app->add_flag("--overwrite", c.overwrite, "Replace the outputs of an earlier run");
  if (with_name) app->add_option("--name", c.name, "Experiment name (default: subcommand)");
}

nlohmann::json versions() {
  return {{"kiefer", KIEFER_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"openssl", OpenSSL_version(OPENSSL_VERSION)},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus}};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s = "kiefer";
  for (const auto& a : args) s += " " + a;
  return s;
}

void print_report(const ExperimentReport& r, std::ostream& out) {
  out << (r.passed() ? "[PASS] " : "[FAIL] ") << r.name << " (" << r.kind << ", "
      << format_double(std::round(r.wall_time_s * 100.0) / 100.0) << " s)\n";
  for (const auto& c : r.criteria) {
    out << "    " << (c.pass ? "pass " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << ": " << c.detail;
    out << "\n";
  }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation lab for empirical processes of dependent sequences and their Kiefer-process approximation",
               "kiefer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", KIEFER_VERSION);

  const std::vector<std::pair<std::string, std::vector<std::string>>> layout{
      {"simulate", {"simulate"}}, {"lambda", {"lambda"}}, {"kiefer", {"kiefer"}},
      {"couple", {"couple"}},     {"beta", {"beta", "decay"}}, {"clt", {"clt"}},
      {"lil", {"lil"}},           {"boundary", {"boundary"}}, {"rates", {"rates"}}};
  const std::map<std::string, std::string> blurbs{
      {"simulate", "Generate a trajectory"},
      {"lambda", "Estimate the long-run covariance on a dyadic grid"},
      {"kiefer", "Simulate a Kiefer skeleton (and optionally validate the simulator)"},
      {"couple", "W1 coupling scaling between block sums and Gaussian vectors"},
      {"beta", "Dependence coefficients (--mode beta) or lag-covariance decay (--mode decay)"},
      {"clt", "CLT marginals of the normalized empirical process"},
      {"lil", "LIL envelope along one trajectory"},
      {"boundary", "Degenerate boundary at gamma = 1/2"},
      {"rates", "Variance growth of R(s, n)"}};

  std::vector<std::unique_ptr<Subcommand>> subs;
  for (const auto& [name, kinds] : layout) {
    auto sub = std::make_unique<Subcommand>();
    sub->app = app.add_subcommand(name, blurbs.at(name));
    sub->kinds = kinds;
    add_common(sub->app, sub->common, true);
    std::vector<std::string> keys;
    for (const auto& k : kinds) {
      for (const auto& key : allowed_params(k)) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
      }
    }
    for (const auto& key : keys) {
      sub->options[key] = sub->app->add_option("--" + key, sub->values[key], "parameter '" + key + "'");
    }
    if (kinds.size() > 1) {
      sub->mode = kinds.front();
      sub->app->add_option("--mode", sub->mode, "Experiment kind")
          ->check(CLI::IsMember(kinds))
          ->capture_default_str();
    }
    subs.push_back(std::move(sub));
  }

  Common suite_common;
  std::string config_path;
  std::string preset;
  bool dry_run = false;
  CLI::App* suite = app.add_subcommand("suite", "Run a list of experiments from a config file or preset");
  add_common(suite, suite_common, false);
  auto* config_opt = suite->add_option("--config", config_path, "key = value config file");
  auto* preset_opt = suite->add_option("--preset", preset, "Named suite")
                         ->check(CLI::IsMember({"iid-anchors", "lsv", "boundary", "coupling", "kiefer"}));
  config_opt->excludes(preset_opt);
  suite->add_flag("--dry-run", dry_run, "Validate and print the resolved config; write nothing");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitError;
  }

  RunConfig config;
  bool overwrite = false;
  try {
    if (suite->parsed()) {
      if (config_opt->count() > 0) {
        config = load_config(config_path);
      } else if (preset_opt->count() > 0) {
        config.experiments = preset_suite(preset);
      } else {
        err << "error: suite needs --config or --preset\n";
        return kExitError;
      }
      const Common& c = suite_common;
      if (c.seed_opt->count()) config.seed = c.seed;
      if (c.threads_opt->count()) config.threads = c.threads;
      if (c.calibration_opt->count()) config.calibration_length = c.calibration_length;
      if (c.out_opt->count()) config.output_dir = c.out;
      overwrite = c.overwrite;
    } else {
      const auto it = std::find_if(subs.begin(), subs.end(), [](const auto& s) { return s->app->parsed(); });
      const Subcommand& s = **it;
      const std::string kind = s.kinds.size() > 1 ? s.mode : s.kinds.front();
      ExperimentSpec spec{s.common.name.empty() ? s.app->get_name() : s.common.name, kind, {}};
      const auto allowed = allowed_params(kind);
      for (const auto& [key, opt] : s.options) {
        if (opt->count() == 0) continue;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
          err << "error: --" << key << " does not apply to --mode " << kind << "\n";
          return kExitError;
        }
        spec.params[key] = s.values.at(key);
      }
      config.seed = s.common.seed;
      config.threads = s.common.threads;
      config.calibration_length = s.common.calibration_length;
      config.output_dir = s.common.out;
      config.experiments.push_back(std::move(spec));
      overwrite = s.common.overwrite;
    }
    if (const char* env = std::getenv("KIEFER_OUTPUT_DIR"); env && *env) config.output_dir = env;
    validate_config(config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  if (dry_run) {
    out << render_config(config);
    return kExitOk;
  }

  const fs::path dir = config.output_dir;
  try {
    prepare_output_dir(dir, overwrite);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  nlohmann::json manifest;
  manifest["command"] = join_args(args);
  manifest["seed"] = config.seed;
  manifest["threads"] = config.threads;
  manifest["calibration_length"] = config.calibration_length;
  manifest["config"] = render_config(config);
  manifest["versions"] = versions();
  manifest["reports"] = nlohmann::json::array();
  manifest["files"] = nlohmann::json::array();

  bool all_pass = true;
  std::string failure;
  const auto start = std::chrono::steady_clock::now();
  try {
    run_suite(config.suite(), [&](const ExperimentReport& r) {
      const auto paths = write_outputs(r, dir);
      for (const auto& p : paths) {
        manifest["files"].push_back(
            {{"path", p.filename().string()}, {"sha256", sha256_hex(read_file(p))}});
      }
      manifest["reports"].push_back({{"name", r.name},
                                     {"kind", r.kind},
                                     {"passed", r.passed()},
                                     {"wall_time_s", r.wall_time_s}});
      all_pass = all_pass && r.passed();
      print_report(r, out);
    });
  } catch (const std::exception& e) {
    failure = e.what();
  }
  manifest["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest["status"] = failure.empty() ? "ok" : "error";
  if (!failure.empty()) manifest["error"] = failure;
  try {
    atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  if (!failure.empty()) {
    err << "error: " << failure << "\n";
    return kExitError;
  }
  out << (all_pass ? "all criteria passed" : "some criteria failed") << "; outputs in "
      << dir.string() << "\n";
  return all_pass ? kExitOk : kExitCriterionFailed;
}

}  // namespace kiefer::cli
