#pragma once

#include "latentis/types.hpp"

namespace latentis {

/// Partial least squares between X (n x m) and a fixed target block Y
/// (n x d). Components are the leading singular pairs of the running
/// cross-covariance X^T Y; after each pair the extracted score direction is
/// deflated out of X only. p/q weight vectors have unit norm.
struct PlsModel {
  Matrix x_weights;        // m x k, columns p_j
  Matrix y_weights;        // d x k, columns q_j
  Matrix x_scores;         // n x k, training u_j
  Matrix y_scores;         // n x k, training v_j
  Matrix rotation;         // m x k, scores of new data = centered X * rotation
  Matrix coefficients;     // m x d regression matrix B
  Vector singular_values;  // k, descending, nonnegative
  Vector x_means;          // m
  Vector y_means;          // d
  int components = 0;      // may fall short of the request (see zero_cross)
  bool zero_cross = false; // cross-covariance vanished before k components
};

enum class PlsAlgorithm { svd, nipals };

struct PlsOptions {
  PlsAlgorithm algorithm = PlsAlgorithm::svd;
  int max_iter = 1000;   // nipals power iterations per component
  double tol = 1e-14;    // nipals convergence on the weight vector
};

/// k must not exceed the rank of X. A vanishing cross-covariance stops
/// extraction early and flags zero_cross instead of failing; with zero
/// components the model predicts the Y column means.
PlsModel fit_pls(const Matrix& X, const Matrix& Y, int k, const PlsOptions& opts = {});

/// Yhat = (X - x_means) B + y_means.
Matrix pls_predict(const PlsModel& model, const Matrix& X);

/// Score propagation for new data: (X - x_means) * rotation.
Matrix pls_transform(const PlsModel& model, const Matrix& X);

}  // namespace latentis
