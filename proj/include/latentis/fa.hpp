#pragma once

#include <vector>

#include "latentis/types.hpp"

namespace latentis {

/// Factor analysis: x = W t + mu + eps with t ~ N(0, I) and eps ~ N(0, Psi),
/// Psi diagonal. Fitted by expectation-maximization.
struct FaModel {
  Matrix W;        // m x k loading matrix
  Vector mu;       // m
  Vector psi;      // m diagonal noise variances, strictly positive
  int k = 0;
  std::vector<double> loglik_trace;
  bool converged = false;
};

/// Intermediate E-step quantities, exposed for diagnostics.
struct FaEmState {
  Matrix G;                 // k x k posterior covariance (I + W' Psi^-1 W)^-1
  Matrix Et;                // n x k rows of E[t_i]
  std::vector<Matrix> Ett;  // per-sample E[t_i t_i'] = G + E[t_i] E[t_i]'
  Matrix S;                 // m x m data covariance (1/n normalization)
};

struct FaOptions {
  int max_iter = 200;
  double tol = 1e-8;
};

FaModel fit_fa(const Matrix& data, int k, const FaOptions& opts = {});

/// Posterior mean of the latent vector: G W' Psi^-1 (x - mu).
Vector fa_infer(const FaModel& model, const Vector& x);
Matrix fa_infer(const FaModel& model, const Matrix& data);

/// Marginal log-likelihood of the data under N(mu, W W' + Psi).
double fa_loglik(const FaModel& model, const Matrix& data);

FaEmState fa_em_state(const FaModel& model, const Matrix& data);

}  // namespace latentis
