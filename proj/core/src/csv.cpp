#include "lrca/models/csv.hpp"

#include "lrca/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

namespace lrca::models {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

double parse_number(std::string_view token, std::size_t line_no) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidData,
                "line " + std::to_string(line_no) + ": bad value '" + std::string(token) + "'");
  }
  return v;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidData, "cannot open " + path.string());
  return in;
}

}  // namespace

Eigen::Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw Error(ErrorKind::InvalidData, "missing header");
  for (auto f : split(line)) {
    if (f.empty()) throw Error(ErrorKind::InvalidData, "blank header field");
    table.header.push_back(unquote(f));
  }
  const std::size_t cols = table.header.size();
  std::vector<double> data;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      // Trailing blank lines are fine; a blank line followed by data is not.
      std::string rest;
      while (std::getline(in, rest)) {
        if (!trim(rest).empty()) {
          throw Error(ErrorKind::InvalidData, "blank row at line " + std::to_string(line_no));
        }
      }
      break;
    }
    const auto fields = split(line);
    if (fields.size() != cols) {
      throw Error(ErrorKind::InvalidData, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(cols) + " fields, got " +
                                              std::to_string(fields.size()));
    }
    for (auto f : fields) data.push_back(parse_number(f, line_no));
    ++rows;
  }
  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r * cols + c];
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return read_csv(in);
}

std::vector<double> read_series(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() != 1 || t.header[0] != "x") {
    throw Error(ErrorKind::InvalidData, "series file must have the single column 'x'");
  }
  if (t.values.rows() == 0) throw Error(ErrorKind::InvalidData, "empty series");
  const Vector col = t.values.col(0);
  return {col.data(), col.data() + col.size()};
}

SurvivalData read_survival(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.empty() || t.header[0] != "time") {
    throw Error(ErrorKind::InvalidData, "survival file must start with column 'time'");
  }
  const Eigen::Index n = t.values.rows();
  if (n == 0) throw Error(ErrorKind::InvalidData, "empty survival file");
  SurvivalData out;
  out.times = t.values.col(0);
  out.x.resize(n, t.values.cols());
  out.x.col(0).setOnes();
  out.x.rightCols(t.values.cols() - 1) = t.values.rightCols(t.values.cols() - 1);
  out.covariates.assign(t.header.begin() + 1, t.header.end());
  return out;
}

PanelFile read_panel(std::istream& in) {
  const CsvTable t = read_csv(in);
  if (t.header.size() < 3 || t.header[0] != "id" || t.header[1] != "t" || t.header[2] != "y") {
    throw Error(ErrorKind::InvalidData, "panel file must start with columns id,t,y");
  }
  const Eigen::Index rows = t.values.rows();
  if (rows == 0) throw Error(ErrorKind::InvalidData, "empty panel");
  // Periods of the first individual define T; every block must repeat them.
  Eigen::Index periods = 0;
  while (periods < rows && t.values(periods, 0) == t.values(0, 0)) ++periods;
  if (rows % periods != 0) throw Error(ErrorKind::UnbalancedPanel, "rows not a multiple of T");
  const Eigen::Index individuals = rows / periods;
  for (Eigen::Index i = 0; i < individuals; ++i) {
    const double id = t.values(i * periods, 0);
    if (i > 0 && !(id > t.values(i * periods - 1, 0))) {
      throw Error(ErrorKind::UnbalancedPanel, "ids not sorted or blocks of unequal length");
    }
    for (Eigen::Index s = 0; s < periods; ++s) {
      const Eigen::Index r = i * periods + s;
      if (t.values(r, 0) != id || t.values(r, 1) != t.values(s, 1)) {
        throw Error(ErrorKind::UnbalancedPanel, "row " + std::to_string(r + 2) +
                                                    " breaks the balanced id/t layout");
      }
    }
  }
  PanelFile out;
  const Eigen::Index k = t.values.cols() - 3;
  out.panel.individuals = static_cast<std::size_t>(individuals);
  out.panel.periods = static_cast<std::size_t>(periods);
  out.panel.y = t.values.col(2);
  out.panel.x.resize(rows, k + 1);
  out.panel.x.col(0).setOnes();
  out.panel.x.rightCols(k) = t.values.rightCols(k);
  out.covariates.assign(t.header.begin() + 3, t.header.end());
  out.panel.validate();
  return out;
}

PanelFile read_panel(const std::filesystem::path& path) {
  auto in = open(path);
  return read_panel(in);
}

}  // namespace lrca::models
