#include "latentis/pca.hpp"

#include "latentis/linalg.hpp"

namespace latentis {

PcaModel fit_pca(const Matrix& data, int k, bool keep_residual) {
  const Index n = data.rows();
  const Index m = data.cols();
  if (k < 1 || k > m)
    throw std::invalid_argument("fit_pca: k must be in [1, " + std::to_string(m) + "], got " +
                                std::to_string(k));
  if (n < 2) throw std::invalid_argument("fit_pca: need at least 2 samples");

  Matrix centered = data.rowwise() - data.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(n);
  SymEig eig = sym_eig_desc(cov);

  PcaModel model;
  model.k = k;
  model.eigenvalues = eig.values.cwiseMax(0.0);
  model.loadings_p = eig.vectors.leftCols(k);
  if (keep_residual && k < m) model.loadings_r = eig.vectors.rightCols(m - k);
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& data) {
  if (data.cols() != model.loadings_p.rows())
    throw std::invalid_argument("pca_transform: dimension mismatch");
  return data * model.loadings_p;
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& scores) {
  if (scores.cols() != model.k)
    throw std::invalid_argument("pca_reconstruct: dimension mismatch");
  return scores * model.loadings_p.transpose();
}

Matrix pca_residual(const PcaModel& model, const Matrix& data) {
  return data - pca_reconstruct(model, pca_transform(model, data));
}

}  // namespace latentis
