#pragma once

#include <cstdint>

#include "latentis/types.hpp"

namespace latentis {

/// Independent component analysis on data in variables-by-samples
/// orientation: X = A S with k independent sources. Fitted by FastICA with
/// the log-cosh contrast (g = tanh) and symmetric decorrelation.
struct IcaModel {
  Matrix whitening;   // k x m
  Matrix mixing;      // m x k, pseudo-inverse of separating
  Matrix separating;  // k x m, sources = separating * x
  int k = 0;
  bool converged = false;
  // Every recovered source is statistically indistinguishable from Gaussian
  // (log-cosh contrast within sampling error of the Gaussian baseline), so
  // the rotation is arbitrary. Expected for Gaussian-only inputs.
  bool ambiguous = false;
};

struct WhitenResult {
  Matrix Z;  // k x n whitened data, identity covariance
  Matrix V;  // k x m whitening transform
};

/// Whitening from the eigensystem of the (1/n) X X^T second-moment matrix,
/// truncated to the top k directions. Input must be centered. Throws when k
/// exceeds the numerical rank (eigenvalue below floor).
WhitenResult whiten(const Matrix& data_vars_by_samples, int k);

struct IcaOptions {
  int max_iter = 500;
  double tol = 1e-10;
  std::uint64_t seed = 0;
};

/// Requires n > m samples of centered data; k <= m sources. A run that
/// exhausts max_iter leaves converged = false (expected for Gaussian
/// sources, which FastICA cannot separate).
IcaModel fit_ica(const Matrix& data_vars_by_samples, int k, const IcaOptions& opts = {});

/// Estimated sources: separating * data.
Matrix ica_sources(const IcaModel& model, const Matrix& data_vars_by_samples);

}  // namespace latentis
