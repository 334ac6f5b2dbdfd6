#pragma once

#include <string>
#include <vector>

#include "latentis/types.hpp"

namespace latentis {

/// Tabular numeric data: n samples (rows) by m named variables (columns).
/// Loaders guarantee every entry is finite and names are distinct.
struct Dataset {
  Matrix values;
  std::vector<std::string> names;

  Index n() const { return values.rows(); }
  Index m() const { return values.cols(); }
};

/// Column-wise standardization fitted on training data.
/// Constant columns keep a placeholder std of 1 and transform to all-zeros.
struct Scaler {
  Vector means;
  Vector stds;
  std::vector<bool> constant;

  Matrix apply(const Matrix& data) const;
  Matrix invert(const Matrix& data) const;
};

/// Parse a CSV file of real numbers. With header=true the first row supplies
/// variable names; otherwise names are generated as x1..xm. Ragged rows,
/// non-numeric or non-finite cells, and empty files are ParseErrors that name
/// the offending row and column.
Dataset load_csv(const std::string& path, bool header);

/// Write a matrix as CSV with the given column names (empty names = no header).
/// Doubles are printed with shortest round-trip precision, so identical inputs
/// produce byte-identical files.
void write_csv(const std::string& path, const Matrix& values,
               const std::vector<std::string>& names);

/// Column means and sample standard deviations (n-1 denominator). Requires
/// n >= 2. Columns with zero variance are flagged constant.
Scaler fit_scaler(const Matrix& data);
Scaler fit_scaler(const Dataset& data);

std::string format_double(double v);

}  // namespace latentis
