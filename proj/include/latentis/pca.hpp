#pragma once

#include "latentis/types.hpp"

namespace latentis {

/// Principal component analysis of mean-centered data: the eigensystem of
/// (1/n) X^T X split into a retained subspace and a residual subspace.
struct PcaModel {
  Matrix loadings_p;   // m x k, orthonormal columns
  Matrix loadings_r;   // m x (m-k), empty when not retained
  Vector eigenvalues;  // all m, descending, clamped at 0
  int k = 0;
};

/// Fit on an n x m data matrix. The data is recentered internally before the
/// covariance is formed; loadings are oriented so each column's
/// largest-magnitude entry is positive.
PcaModel fit_pca(const Matrix& data, int k, bool keep_residual = true);

Matrix pca_transform(const PcaModel& model, const Matrix& data);
Matrix pca_reconstruct(const PcaModel& model, const Matrix& scores);
Matrix pca_residual(const PcaModel& model, const Matrix& data);

}  // namespace latentis
