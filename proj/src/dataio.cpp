#include "latentis/dataio.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace latentis {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

bool parse_cell(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  if (end != begin + cell.size() || errno == ERANGE) return false;
  return std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw ParseError("empty file: " + path);

  std::vector<std::string> names;
  std::size_t first_data = 0;
  if (header) {
    names = split_row(lines[0]);
    first_data = 1;
    if (lines.size() == 1) throw ParseError("file has a header but no data rows: " + path);
  }

  const std::size_t m = split_row(lines[first_data]).size();
  if (header && names.size() != m)
    throw ParseError("header has " + std::to_string(names.size()) +
                     " columns but row 1 has " + std::to_string(m));
  if (!header) {
    for (std::size_t j = 0; j < m; ++j) names.push_back("x" + std::to_string(j + 1));
  }
  std::set<std::string> uniq(names.begin(), names.end());
  if (uniq.size() != names.size()) throw ParseError("duplicate column names in " + path);

  const std::size_t n = lines.size() - first_data;
  Matrix values(static_cast<Index>(n), static_cast<Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    auto cells = split_row(lines[first_data + i]);
    if (cells.size() != m)
      throw ParseError("ragged row " + std::to_string(i + 1) + ": expected " +
                       std::to_string(m) + " columns, got " + std::to_string(cells.size()));
    for (std::size_t j = 0; j < m; ++j) {
      double v;
      if (!parse_cell(cells[j], v))
        throw ParseError("non-numeric cell at row " + std::to_string(i + 1) +
                         " column " + std::to_string(j + 1) + ": '" + cells[j] + "'");
      values(static_cast<Index>(i), static_cast<Index>(j)) = v;
    }
  }
  return Dataset{std::move(values), std::move(names)};
}

std::string format_double(double v) {
  // Shortest representation that parses back to the same bits.
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

void write_csv(const std::string& path, const Matrix& values,
               const std::vector<std::string>& names) {
  std::ostringstream out;
  if (!names.empty()) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (j) out << ',';
      out << names[j];
    }
    out << '\n';
  }
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(values(i, j));
    }
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write file: " + path);
  f << out.str();
}

Scaler fit_scaler(const Matrix& data) {
  if (data.rows() < 2) throw std::invalid_argument("fit_scaler needs at least 2 samples");
  const Index m = data.cols();
  Scaler s;
  s.means = data.colwise().mean();
  s.stds = Vector::Ones(m);
  s.constant.assign(static_cast<std::size_t>(m), false);
  for (Index j = 0; j < m; ++j) {
    const double ss = (data.col(j).array() - s.means(j)).square().sum();
    const double var = ss / static_cast<double>(data.rows() - 1);
    if (var <= 0.0) {
      s.constant[static_cast<std::size_t>(j)] = true;
    } else {
      s.stds(j) = std::sqrt(var);
    }
  }
  return s;
}

Scaler fit_scaler(const Dataset& data) { return fit_scaler(data.values); }

Matrix Scaler::apply(const Matrix& data) const {
  if (data.cols() != means.size())
    throw std::invalid_argument("scaler dimension mismatch: " + std::to_string(data.cols()) +
                                " columns vs " + std::to_string(means.size()));
  Matrix out = data;
  for (Index j = 0; j < data.cols(); ++j) {
    if (constant[static_cast<std::size_t>(j)]) {
      out.col(j).setZero();
    } else {
      out.col(j) = (data.col(j).array() - means(j)) / stds(j);
    }
  }
  return out;
}

Matrix Scaler::invert(const Matrix& data) const {
  if (data.cols() != means.size())
    throw std::invalid_argument("scaler dimension mismatch: " + std::to_string(data.cols()) +
                                " columns vs " + std::to_string(means.size()));
  Matrix out = data;
  for (Index j = 0; j < data.cols(); ++j) {
    out.col(j) = data.col(j).array() * stds(j) + means(j);
  }
  return out;
}

}  // namespace latentis
