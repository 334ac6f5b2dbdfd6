#include "latentis/fa.hpp"

#include <cmath>

#include "latentis/linalg.hpp"

namespace latentis {

namespace {

Matrix posterior_cov(const Matrix& W, const Vector& psi) {
  const Index k = W.cols();
  Matrix M = Matrix::Identity(k, k) + W.transpose() * psi.cwiseInverse().asDiagonal() * W;
  return M.llt().solve(Matrix::Identity(k, k));
}

double gaussian_loglik(const Matrix& S, const Matrix& W, const Vector& psi, Index n) {
  const Index m = W.rows();
  Matrix C = W * W.transpose();
  C.diagonal() += psi;
  Eigen::LLT<Matrix> llt(C);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fa: model covariance not positive definite");
  const Matrix L = llt.matrixL();
  double logdet = 0.0;
  for (Index i = 0; i < m; ++i) logdet += 2.0 * std::log(L(i, i));
  const double trace = llt.solve(S).trace();
  return -0.5 * static_cast<double>(n) *
         (static_cast<double>(m) * std::log(2.0 * M_PI) + logdet + trace);
}

}  // namespace

FaModel fit_fa(const Matrix& data, int k, const FaOptions& opts) {
  const Index n = data.rows();
  const Index m = data.cols();
  if (k < 1 || k > m) throw std::invalid_argument("fit_fa: k out of range");
  if (n < 2) throw std::invalid_argument("fit_fa: need at least 2 samples");

  FaModel model;
  model.k = k;
  model.mu = data.colwise().mean();
  Matrix centered = data.rowwise() - model.mu.transpose();
  Matrix S = centered.transpose() * centered / static_cast<double>(n);

  const double psi_floor = 1e-6 * S.diagonal().mean();
  if (!(psi_floor > 0)) throw std::invalid_argument("fit_fa: data has zero total variance");

  // Deterministic start: principal directions scaled by half their variance,
  // noise at half the per-variable variance.
  SymEig eig = sym_eig_desc(S);
  model.W = Matrix(m, k);
  for (int j = 0; j < k; ++j)
    model.W.col(j) = eig.vectors.col(j) * std::sqrt(std::max(eig.values(j) * 0.5, psi_floor));
  model.psi = (S.diagonal() * 0.5).cwiseMax(psi_floor);

  double loglik = gaussian_loglik(S, model.W, model.psi, n);
  model.loglik_trace.push_back(loglik);

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // E-step.
    Matrix G = posterior_cov(model.W, model.psi);
    Matrix Et = centered * model.psi.cwiseInverse().asDiagonal() * model.W * G;  // n x k
    Matrix sum_Ett = static_cast<double>(n) * G + Et.transpose() * Et;

    // M-step.
    Matrix cross = centered.transpose() * Et;  // m x k
    Matrix W_new = sum_Ett.ldlt().solve(cross.transpose()).transpose();
    Vector psi_new =
        (S - W_new * (Et.transpose() * centered) / static_cast<double>(n)).diagonal();
    model.W = W_new;
    model.psi = psi_new.cwiseMax(psi_floor);

    const double next = gaussian_loglik(S, model.W, model.psi, n);
    model.loglik_trace.push_back(next);
    if (std::abs(next - loglik) < opts.tol * std::abs(next)) {
      model.converged = true;
      loglik = next;
      break;
    }
    loglik = next;
  }
  return model;
}

Vector fa_infer(const FaModel& model, const Vector& x) {
  if (x.size() != model.W.rows()) throw std::invalid_argument("fa_infer: dimension mismatch");
  Matrix G = posterior_cov(model.W, model.psi);
  return G * model.W.transpose() * model.psi.cwiseInverse().asDiagonal() * (x - model.mu);
}

Matrix fa_infer(const FaModel& model, const Matrix& data) {
  if (data.cols() != model.W.rows()) throw std::invalid_argument("fa_infer: dimension mismatch");
  Matrix G = posterior_cov(model.W, model.psi);
  Matrix centered = data.rowwise() - model.mu.transpose();
  return centered * model.psi.cwiseInverse().asDiagonal() * model.W * G;
}

double fa_loglik(const FaModel& model, const Matrix& data) {
  Matrix centered = data.rowwise() - model.mu.transpose();
  Matrix S = centered.transpose() * centered / static_cast<double>(data.rows());
  return gaussian_loglik(S, model.W, model.psi, data.rows());
}

FaEmState fa_em_state(const FaModel& model, const Matrix& data) {
  FaEmState state;
  state.G = posterior_cov(model.W, model.psi);
  Matrix centered = data.rowwise() - model.mu.transpose();
  state.S = centered.transpose() * centered / static_cast<double>(data.rows());
  state.Et = centered * model.psi.cwiseInverse().asDiagonal() * model.W * state.G;
  state.Ett.reserve(static_cast<std::size_t>(data.rows()));
  for (Index i = 0; i < data.rows(); ++i) {
    Vector t = state.Et.row(i);
    state.Ett.push_back(state.G + t * t.transpose());
  }
  return state;
}

}  // namespace latentis
