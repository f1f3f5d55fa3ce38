#include "kiefer/report.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "kiefer/error.hpp"

namespace kiefer {

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw DimensionError("Table::add_row: width mismatch in " + name);
  rows.push_back(std::move(row));
}

bool ExperimentReport::passed() const {
  for (const auto& c : criteria) {
    if (!c.pass) return false;
  }
  return true;
}

const Statistic& ExperimentReport::statistic(const std::string& stat_name) const {
  for (const auto& s : statistics) {
    if (s.name == stat_name) return s;
  }
  throw std::out_of_range("no statistic '" + stat_name + "' in report " + name);
}

const Criterion& ExperimentReport::criterion(const std::string& criterion_name) const {
  for (const auto& c : criteria) {
    if (c.name == criterion_name) return c;
  }
  throw std::out_of_range("no criterion '" + criterion_name + "' in report " + name);
}

const Table& ExperimentReport::table(const std::string& table_name) const {
  for (const auto& t : tables) {
    if (t.name == table_name) return t;
  }
  throw std::out_of_range("no table '" + table_name + "' in report " + name);
}

void ExperimentReport::add_statistic(std::string stat_name, double value, double se) {
  statistics.push_back({std::move(stat_name), value, se});
}

void ExperimentReport::add_criterion(std::string criterion_name, bool pass, std::string detail) {
  criteria.push_back({std::move(criterion_name), pass, std::move(detail)});
}

void ExperimentReport::add_param(std::string key, std::string value) {
  params.emplace_back(std::move(key), std::move(value));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string statistics_csv(const ExperimentReport& report) {
  std::string out = "name,value,se\n";
  for (const auto& s : report.statistics) {
    out += s.name + ',' + format_double(s.value) + ',' + format_double(s.se) + '\n';
  }
  return out;
}

}  // namespace kiefer
