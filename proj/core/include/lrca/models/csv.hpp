#pragma once

#include "lrca/models/error_components.hpp"
#include "lrca/numeric.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace lrca::models {

/// Header names plus numeric body. Any blank field, NaN, non-numeric token or
/// ragged row throws InvalidData.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;

  [[nodiscard]] Eigen::Index column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

/// Single column `x`.
std::vector<double> read_series(const std::filesystem::path& path);

struct SurvivalData {
  Vector times;
  Matrix x;  // intercept column first, then covariates in file order
  std::vector<std::string> covariates;
};

/// Column `time`, then covariates.
SurvivalData read_survival(const std::filesystem::path& path);

struct PanelFile {
  PanelData panel;  // x gets an intercept column first
  std::vector<std::string> covariates;
};

/// Columns `id`, `t`, `y`, then covariates; rows sorted id-major with the same
/// periods for every individual.
PanelFile read_panel(const std::filesystem::path& path);
PanelFile read_panel(std::istream& in);

}  // namespace lrca::models
