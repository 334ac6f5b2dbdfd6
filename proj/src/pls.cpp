#include "latentis/pls.hpp"

#include <cmath>

#include "latentis/linalg.hpp"

namespace latentis {

namespace {

struct WeightPair {
  Vector p;
  Vector q;
  double sigma;
};

WeightPair leading_pair_svd(const Matrix& C) {
  Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU().col(0), svd.matrixV().col(0), svd.singularValues()(0)};
}

// Power iteration in score space (the classic NIPALS inner loop).
WeightPair leading_pair_nipals(const Matrix& Xd, const Matrix& Yc, const PlsOptions& opts) {
  Index start = 0;
  Yc.colwise().squaredNorm().maxCoeff(&start);
  Vector u_score = Yc.col(start);
  Vector p = Vector::Zero(Xd.cols());
  Vector q = Vector::Zero(Yc.cols());
  for (int it = 0; it < opts.max_iter; ++it) {
    Vector p_next = Xd.transpose() * u_score;
    const double pn = p_next.norm();
    if (pn == 0) break;
    p_next /= pn;
    Vector t = Xd * p_next;
    Vector q_next = Yc.transpose() * t;
    const double qn = q_next.norm();
    if (qn == 0) {
      p = p_next;
      break;
    }
    q_next /= qn;
    u_score = Yc * q_next;
    const double delta = std::min((p_next - p).norm(), (p_next + p).norm());
    p = p_next;
    q = q_next;
    if (delta < opts.tol) break;
  }
  const double sigma = q.size() > 0 ? std::abs(p.dot(Xd.transpose() * (Yc * q))) : 0.0;
  return {p, q, sigma};
}

}  // namespace

PlsModel fit_pls(const Matrix& X, const Matrix& Y, int k, const PlsOptions& opts) {
  const Index n = X.rows();
  if (Y.rows() != n) throw std::invalid_argument("fit_pls: X and Y row counts differ");
  const Index m = X.cols();
  const Index d = Y.cols();
  if (k < 1) throw std::invalid_argument("fit_pls: k must be >= 1");

  PlsModel model;
  model.x_means = X.colwise().mean();
  model.y_means = Y.colwise().mean();
  Matrix Xc = X.rowwise() - model.x_means.transpose();
  Matrix Yc = Y.rowwise() - model.y_means.transpose();

  const Index rank = Eigen::ColPivHouseholderQR<Matrix>(Xc).rank();
  if (k > rank)
    throw std::invalid_argument("fit_pls: k = " + std::to_string(k) +
                                " exceeds rank(X) = " + std::to_string(rank));

  Matrix Xd = Xc;  // deflated copy
  model.x_weights = Matrix::Zero(m, k);
  model.y_weights = Matrix::Zero(d, k);
  model.x_scores = Matrix::Zero(n, k);
  model.y_scores = Matrix::Zero(n, k);
  model.rotation = Matrix::Zero(m, k);
  model.singular_values = Vector::Zero(k);
  Matrix x_loadings = Matrix::Zero(m, k);  // c_j = Xd^T u / |u|^2, deflation directions

  double sigma_floor = 0.0;
  int extracted = 0;
  for (int j = 0; j < k; ++j) {
    Matrix C = Xd.transpose() * Yc;
    WeightPair pair = opts.algorithm == PlsAlgorithm::svd ? leading_pair_svd(C)
                                                          : leading_pair_nipals(Xd, Yc, opts);
    if (j == 0) sigma_floor = std::max(pair.sigma * 1e-12, 1e-300);
    if (pair.sigma <= sigma_floor) {
      model.zero_cross = true;
      break;
    }

    Vector p = pair.p;
    Vector q = pair.q;
    orient_sign(p);
    if (p.dot(C * q) < 0) q = -q;  // keep the extracted pair positively correlated

    Vector u = Xd * p;
    Vector v = Yc * q;
    const double unorm2 = u.squaredNorm();
    Vector c = Xd.transpose() * u / unorm2;
    Xd -= u * c.transpose();

    // Express the score as a linear map of the original variables.
    Vector r = p;
    for (int i = 0; i < extracted; ++i)
      r -= model.rotation.col(i) * x_loadings.col(i).dot(p);

    model.x_weights.col(j) = p;
    model.y_weights.col(j) = q;
    model.x_scores.col(j) = u;
    model.y_scores.col(j) = v;
    model.rotation.col(j) = r;
    model.singular_values(j) = p.dot(C * q);
    x_loadings.col(j) = c;
    ++extracted;
  }

  model.components = extracted;
  if (extracted < k) {
    model.x_weights.conservativeResize(m, extracted);
    model.y_weights.conservativeResize(d, extracted);
    model.x_scores.conservativeResize(n, extracted);
    model.y_scores.conservativeResize(n, extracted);
    model.rotation.conservativeResize(m, extracted);
    model.singular_values.conservativeResize(extracted);
  }

  if (extracted == 0) {
    model.coefficients = Matrix::Zero(m, d);
  } else {
    const Matrix& U = model.x_scores;
    Matrix theta = (U.transpose() * U).ldlt().solve(U.transpose() * Yc);
    model.coefficients = model.rotation * theta;
  }
  return model;
}

Matrix pls_predict(const PlsModel& model, const Matrix& X) {
  if (X.cols() != model.coefficients.rows())
    throw std::invalid_argument("pls_predict: dimension mismatch");
  return ((X.rowwise() - model.x_means.transpose()) * model.coefficients).rowwise() +
         model.y_means.transpose();
}

Matrix pls_transform(const PlsModel& model, const Matrix& X) {
  if (X.cols() != model.rotation.rows())
    throw std::invalid_argument("pls_transform: dimension mismatch");
  return (X.rowwise() - model.x_means.transpose()) * model.rotation;
}

}  // namespace latentis
