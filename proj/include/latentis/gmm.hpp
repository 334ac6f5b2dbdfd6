#pragma once

#include <cstdint>
#include <vector>

#include "latentis/types.hpp"

namespace latentis {

/// Gaussian mixture: p(x) = sum_i alpha_i N(x; mu_i, Sigma_i), fitted by EM
/// with log-space responsibilities and an eigenvalue floor on the component
/// covariances.
struct GmmModel {
  std::vector<double> weights;
  std::vector<Vector> means;
  std::vector<Matrix> covariances;
  int k = 0;
  std::vector<double> loglik_trace;
  bool converged = false;
  bool reinitialized = false;  // a component collapsed and was reseeded
};

struct GmmOptions {
  int max_iter = 300;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

/// Initialization is k-means++-style seeding from the given seed; covariance
/// eigenvalues are floored at 1e-6 times the mean data variance.
GmmModel fit_gmm(const Matrix& data, int k, const GmmOptions& opts = {});

/// Posterior component probabilities per sample; rows sum to 1.
Matrix gmm_responsibilities(const GmmModel& model, const Matrix& data);

/// Total log-likelihood, computed with max-shifted log-sum-exp.
double gmm_loglik(const GmmModel& model, const Matrix& data);

}  // namespace latentis
