#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gdest/excitation.hpp"

namespace gdsim {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Numeric CSV with one header row. Throws gdest::ParseError on bad cells.
CsvTable read_csv(const std::filesystem::path& path);

/// Regressor from the columns whose names start with `prefix` (all non-time
/// columns when empty). A first column named "k" selects discrete time.
gdest::RegressorTrace regressor_from_csv(const CsvTable& table, const std::string& prefix);

}  // namespace gdsim
