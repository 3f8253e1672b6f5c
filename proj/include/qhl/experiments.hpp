// Named, reproducible experiments, one per acceptance criterion, and their
// CSV/JSON reports.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "qhl/config.hpp"

namespace qhl {

struct Check {
  std::string name;
  double value = 0.0;
  std::string bound;
  bool passed = false;
};

/// CSV table; cells are preformatted (numbers at 17 significant digits).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string csv() const;
};

std::string num(double x);

struct ExperimentReport {
  std::string name;
  int criterion = 0;
  std::string title;
  ExperimentConfig config;
  std::vector<Check> checks;
  std::map<std::string, Table> tables;
  std::vector<std::string> notes;

  bool passed() const;
  int failed_count() const;
  std::string summary_json() const;
};

/// In criterion order.
const std::vector<std::string>& experiment_names();
/// Throws Config for an unknown name.
ExperimentConfig default_config(const std::string& name);
/// Module errors are rethrown with the experiment and k that failed.
ExperimentReport run_experiment(const ExperimentConfig& config);
/// <dir>/<name>.json and one <name>[-table].csv per table.
void write_report(const ExperimentReport& report, const std::string& dir);

/// Runs fn(0..n-1) on up to `jobs` threads; results keep index order.
template <class Fn>
void parallel_for(int jobs, int n, Fn fn);

}  // namespace qhl

#include "qhl/detail/parallel.hpp"
