#pragma once

#include "latentis/types.hpp"

namespace latentis {

/// Canonical correlation analysis between two centered blocks X (n x m) and
/// Y (n x d). Projection columns are scaled so training scores have unit
/// variance; correlations are sorted descending in [0, 1].
struct CcaModel {
  Matrix proj_x;        // m x k
  Matrix proj_y;        // d x k
  Vector correlations;  // k
  int k = 0;
};

/// Solved as a symmetric problem: whiten both blocks by the inverse square
/// root of their covariance (pseudo-inverse when rank-deficient) and take the
/// SVD of the whitened cross-covariance.
CcaModel fit_cca(const Matrix& X, const Matrix& Y, int k);

std::pair<Matrix, Matrix> cca_transform(const CcaModel& model, const Matrix& X, const Matrix& Y);

}  // namespace latentis
