#include "trace_csv.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gdest/errors.hpp"

namespace gdsim {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) throw gdest::ParseError("row has the wrong number of cells", lineno);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        throw gdest::ParseError("not a number: '" + c + "'", lineno);
      }
      if (used != c.size()) throw gdest::ParseError("not a number: '" + c + "'", lineno);
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw gdest::ParseError("missing header row", 1);
  return table;
}

gdest::RegressorTrace regressor_from_csv(const CsvTable& table, const std::string& prefix) {
  std::vector<std::size_t> cols;
  for (std::size_t j = 1; j < table.header.size(); ++j) {
    if (prefix.empty() || table.header[j].rfind(prefix, 0) == 0) cols.push_back(j);
  }
  if (cols.empty()) throw gdest::ValidationError("columns", "no column matches '" + prefix + "'");
  if (table.rows.size() < 2) throw gdest::ValidationError("rows", "need at least two samples");

  gdest::RegressorTrace trace;
  trace.mode = table.header.front() == "k" ? gdest::TimeMode::Discrete : gdest::TimeMode::Continuous;
  const double t0 = table.rows.front()[0];
  const double h = table.rows[1][0] - table.rows[0][0];
  if (!(h > 0.0)) throw gdest::ValidationError("time", "time column must increase");
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const double expected = t0 + static_cast<double>(k) * h;
    if (std::abs(table.rows[k][0] - expected) > 1e-6 * h * static_cast<double>(k + 1)) {
      throw gdest::ValidationError("time", "samples are not uniformly spaced");
    }
  }
  trace.grid = gdest::TimeGrid{t0, h, table.rows.size() - 1};
  for (const auto& row : table.rows) {
    gdest::Vec phi(static_cast<int>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) phi(static_cast<int>(i)) = row[cols[i]];
    trace.samples.push_back(std::move(phi));
  }
  trace.validate();
  return trace;
}

}  // namespace gdsim
