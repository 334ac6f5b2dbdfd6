#include "latentis/cca.hpp"

#include <cmath>

#include "latentis/linalg.hpp"

namespace latentis {

CcaModel fit_cca(const Matrix& X, const Matrix& Y, int k) {
  const Index n = X.rows();
  if (Y.rows() != n) throw std::invalid_argument("fit_cca: X and Y row counts differ");
  const Index m = X.cols();
  const Index d = Y.cols();
  if (k < 1 || k > std::min(m, d)) throw std::invalid_argument("fit_cca: k out of range");

  Matrix Xc = X.rowwise() - X.colwise().mean();
  Matrix Yc = Y.rowwise() - Y.colwise().mean();
  Matrix Sxx = Xc.transpose() * Xc / static_cast<double>(n);
  Matrix Syy = Yc.transpose() * Yc / static_cast<double>(n);
  Matrix Sxy = Xc.transpose() * Yc / static_cast<double>(n);
  if (Sxx.diagonal().maxCoeff() <= 0 || Syy.diagonal().maxCoeff() <= 0)
    throw std::invalid_argument("fit_cca: zero-variance input block");

  Matrix Wx = inv_sqrt_psd(Sxx);
  Matrix Wy = inv_sqrt_psd(Syy);
  Matrix M = Wx * Sxy * Wy;
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);

  CcaModel model;
  model.k = k;
  model.proj_x = Wx * svd.matrixU().leftCols(k);
  model.proj_y = Wy * svd.matrixV().leftCols(k);
  model.correlations = svd.singularValues().head(k).cwiseMin(1.0);

  for (int j = 0; j < k; ++j) {
    // Unit training-score variance (exact even on the pseudo-inverse route).
    const double vx = model.proj_x.col(j).dot(Sxx * model.proj_x.col(j));
    const double vy = model.proj_y.col(j).dot(Syy * model.proj_y.col(j));
    if (vx > 0) model.proj_x.col(j) /= std::sqrt(vx);
    if (vy > 0) model.proj_y.col(j) /= std::sqrt(vy);
    orient_sign(model.proj_x.col(j));
    // Keep the pairing positively correlated.
    if (model.proj_x.col(j).dot(Sxy * model.proj_y.col(j)) < 0)
      model.proj_y.col(j) = -model.proj_y.col(j);
  }
  return model;
}

std::pair<Matrix, Matrix> cca_transform(const CcaModel& model, const Matrix& X, const Matrix& Y) {
  if (X.cols() != model.proj_x.rows() || Y.cols() != model.proj_y.rows())
    throw std::invalid_argument("cca_transform: dimension mismatch");
  return {X * model.proj_x, Y * model.proj_y};
}

}  // namespace latentis
