#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kiefer {

/// A numeric table written as one CSV file with a single header row.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
};

struct Statistic {
  std::string name;
  double value = 0.0;
  double se = 0.0;
};

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentReport {
  std::string name;
  std::string kind;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<Statistic> statistics;
  std::vector<Criterion> criteria;
  std::vector<Table> tables;
  std::vector<std::uint64_t> seeds;
  double wall_time_s = 0.0;
  std::string note;

  bool passed() const;
  /// Throws std::out_of_range when absent.
  const Statistic& statistic(const std::string& stat_name) const;
  const Criterion& criterion(const std::string& criterion_name) const;
  const Table& table(const std::string& table_name) const;

  void add_statistic(std::string stat_name, double value, double se = 0.0);
  void add_criterion(std::string criterion_name, bool pass, std::string detail = {});
  void add_param(std::string key, std::string value);
};

/// Shortest decimal string that round-trips to the same double; locale free.
std::string format_double(double v);

/// CSV rendering: header row, then rows in format_double.
std::string to_csv(const Table& table);
/// CSV with columns name,value,se.
std::string statistics_csv(const ExperimentReport& report);

}  // namespace kiefer
