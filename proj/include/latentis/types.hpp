#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace latentis {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Malformed input data (CSV parse failures, non-finite cells, ragged rows).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A model file holds a different kind than the caller asked for.
struct KindError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace latentis
