#include "kiefer_cli/outputs.hpp"

#include <cmath>
#include <fstream>
#include <memory>

#include <unistd.h>

#include <openssl/evp.h>

namespace kiefer::cli {

namespace fs = std::filesystem;

namespace {

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw OutputError("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

void atomic_write(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw OutputError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw OutputError("cannot rename onto '" + path.string() + "'");
  }
}

void prepare_output_dir(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw OutputError("output directory '" + dir.string() + "' cannot be created");
  }
  if (fs::exists(dir / "manifest.json") && !overwrite) {
    throw OutputError("output directory '" + dir.string() +
                      "' already holds a manifest.json; pass --overwrite to replace it");
  }
  const fs::path probe = dir / (".write-probe." + std::to_string(::getpid()));
  {
    std::ofstream out(probe, std::ios::binary);
    if (!out || !(out << "probe") || !out.flush()) {
      fs::remove(probe, ec);
      throw OutputError("output directory '" + dir.string() + "' is not writable");
    }
  }
  fs::remove(probe, ec);
}

nlohmann::json report_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["name"] = report.name;
  j["kind"] = report.kind;
  j["note"] = report.note;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : report.params) {
    if (params.contains(k)) {
      if (!params[k].is_array()) params[k] = nlohmann::json::array({params[k]});
      params[k].push_back(v);
    } else {
      params[k] = v;
    }
  }
  j["params"] = params;
  j["seeds"] = report.seeds;
  j["statistics"] = nlohmann::json::array();
  for (const auto& s : report.statistics) {
    j["statistics"].push_back({{"name", s.name}, {"value", number(s.value)}, {"se", number(s.se)}});
  }
  j["pass"] = nlohmann::json::array();
  for (const auto& c : report.criteria) {
    j["pass"].push_back({{"criterion", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  j["tables"] = nlohmann::json::array();
  for (const auto& t : report.tables) {
    j["tables"].push_back({{"name", t.name}, {"file", report.name + "." + t.name + ".csv"}});
  }
  j["passed"] = report.passed();
  return j;
}

std::vector<fs::path> write_outputs(const ExperimentReport& report, const fs::path& dir) {
  std::vector<fs::path> paths;
  if (report.statistics.empty() && report.tables.empty() && report.criteria.empty()) return paths;
  for (const auto& t : report.tables) {
    paths.push_back(dir / (report.name + "." + t.name + ".csv"));
    atomic_write(paths.back(), to_csv(t));
  }
  paths.push_back(dir / (report.name + ".statistics.csv"));
  atomic_write(paths.back(), statistics_csv(report));
  paths.push_back(dir / (report.name + ".json"));
  atomic_write(paths.back(), report_json(report).dump(2) + "\n");
  return paths;
}

}  // namespace kiefer::cli
