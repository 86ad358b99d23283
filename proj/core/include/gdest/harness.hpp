#pragma once

// Runs scenarios and writes plot-ready CSV, a gnuplot script and a report.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gdest/scenario.hpp"

namespace gdest {

struct RunReport {
  std::string name;
  std::string family;
  std::optional<double> sweep_value;
  std::string system;
  std::string estimator;

  /// |theta| of the reference parameter, when known.
  std::optional<double> truth_norm;
  std::optional<double> final_error;
  std::optional<double> sup_error;
  /// First recorded time after which |theta_err| stays below 1% of |theta|.
  std::optional<double> convergence_time;
  /// Max |theta_err| over the final 20% of the horizon.
  std::optional<double> oscillation_metric;
  /// IE horizon of the estimator's regressor, and min |Delta| past it.
  std::optional<double> t_c;
  std::optional<double> min_abs_delta_after_tc;

  bool diverged = false;
  double diverged_at = 0.0;
  double wall_seconds = 0.0;
  std::size_t rows = 0;
  std::filesystem::path csv_path;
  std::filesystem::path script_path;
  /// Scenario-specific scalars (residuals, peaks, energy margins).
  std::map<std::string, double> metrics;
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<double> h;
  std::optional<double> t_end;
  bool write_files = true;
};

/// Applies overrides, runs, and writes CSV and script when requested.
/// Divergence is reported through the flag; partial traces are kept.
RunReport run_scenario(Scenario s, const RunOptions& options = {});

/// Multi-line plain-text report.
std::string format_report(const RunReport& r);

/// Column names of the CSV for a scenario, time first.
std::vector<std::string> csv_columns(const Scenario& s);

/// Runs every *.toml under `dir` on up to `threads` workers; sorted by name.
std::vector<RunReport> run_directory(const std::filesystem::path& dir, const RunOptions& options,
                                     unsigned threads = 0);

struct ComparisonRow {
  std::string name;
  std::optional<double> convergence_a;
  std::optional<double> convergence_b;
  std::optional<double> final_a;
  std::optional<double> final_b;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::string text() const;
  std::string csv() const;
};

/// Pairs runs by name. Throws ValidationError when the sets differ in names
/// or families.
ComparisonTable compare_runs(const std::vector<RunReport>& a, const std::vector<RunReport>& b);

struct FamilySummary {
  std::string family;
  /// Sorted by sweep value, then name.
  std::vector<RunReport> runs;
  bool all_converged = false;
  /// Convergence time strictly decreases as the sweep value grows.
  bool convergence_decreasing = false;
  std::string text() const;
  std::string csv() const;
};

/// Groups reports by family.
std::vector<FamilySummary> summarize_families(const std::vector<RunReport>& runs);

}  // namespace gdest
