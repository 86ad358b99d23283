#pragma once

// Scenario files: a flat subset of TOML.
//
//   # comment
//   name = "lti_gd"
//   [grid]
//   t_end = 400
//   [signal.u]
//   kind = "exp_sum"
//   weights = [1, 1]
//
// Values are numbers, booleans, quoted strings, or flat arrays of numbers or
// of strings. The full grammar is in docs/scenario_format.md.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gdest/dg_baseline.hpp"
#include "gdest/gd_estimator.hpp"
#include "gdest/mrac.hpp"
#include "gdest/signals.hpp"

namespace gdest {

struct ConfigValue {
  std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>> value;
  int line = 0;
};

using ConfigSection = std::map<std::string, ConfigValue>;

/// Sections keyed by header name; top-level keys live under "".
struct ConfigDocument {
  std::map<std::string, ConfigSection> sections;
  std::map<std::string, int> section_lines;
};

/// Throws ParseError with the offending line number.
ConfigDocument parse_document(const std::string& text);

enum class SystemKind { Identification, Signal, Mrac, Rejection };
enum class EstimatorKind { Gd, Dg, Nlpre };

std::string to_string(SystemKind kind);
std::string to_string(EstimatorKind kind);

struct Scenario {
  std::string name;
  std::string family;
  std::optional<double> sweep_value;
  TimeMode mode = TimeMode::Continuous;

  SystemKind system = SystemKind::Signal;
  std::map<std::string, SignalSpec> signals;

  // identification
  Poly plant_num;
  Poly plant_den;
  Poly filter_den;
  std::string input;
  // signal
  std::vector<std::string> regressor;
  Vec theta;
  // mrac
  Plant plant;
  ReferenceModel model;
  std::string reference;
  MracFilters filters;
  bool adapt = true;
  // rejection
  std::string delta_signal;
  double reject_theta = 0.0;
  double lambda = 1.0;
  bool steady_state = true;

  Disturbance disturbance;

  EstimatorKind estimator = EstimatorKind::Gd;
  GdConfig gd;
  DgConfig dg;
  std::string map_name = "frequency_product";

  double t_end = 0.0;
  double h = 1e-3;
  std::size_t stride = 1;

  std::string csv;
  std::vector<std::string> traces;

  TimeGrid grid() const;
  /// Canonical text of the resolved scenario, defaults included.
  std::string echo() const;
};

/// Parses and validates. Malformed text raises ParseError; a bad value
/// raises ValidationError naming "section.key".
Scenario parse_scenario(const std::string& text);

/// Reads a file; I/O failures raise std::runtime_error.
Scenario load_scenario(const std::filesystem::path& path);

/// Traces a scenario can emit, in the default column order.
std::vector<std::string> available_traces(const Scenario& s);

}  // namespace gdest
