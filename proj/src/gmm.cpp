#include "latentis/gmm.hpp"

#include <cmath>
#include <limits>

#include "latentis/linalg.hpp"
#include "latentis/rng.hpp"

namespace latentis {

namespace {

struct LogDensity {
  Eigen::LLT<Matrix> llt;
  double log_norm;  // -(m/2) log(2 pi) - (1/2) log|Sigma|
};

LogDensity prepare(const Matrix& cov) {
  LogDensity ld{Eigen::LLT<Matrix>(cov), 0.0};
  if (ld.llt.info() != Eigen::Success)
    throw std::runtime_error("gmm: covariance not positive definite");
  double logdet = 0.0;
  const Matrix L = ld.llt.matrixL();
  for (Index i = 0; i < cov.rows(); ++i) logdet += 2.0 * std::log(L(i, i));
  ld.log_norm = -0.5 * (static_cast<double>(cov.rows()) * std::log(2.0 * M_PI) + logdet);
  return ld;
}

double log_gaussian(const LogDensity& ld, const Vector& diff) {
  return ld.log_norm - 0.5 * diff.dot(ld.llt.solve(diff));
}

// n x k matrix of log(alpha_i) + log N(x_j; mu_i, Sigma_i).
Matrix weighted_log_densities(const GmmModel& model, const Matrix& data) {
  const Index n = data.rows();
  Matrix logp(n, model.k);
  for (int i = 0; i < model.k; ++i) {
    LogDensity ld = prepare(model.covariances[static_cast<std::size_t>(i)]);
    const double logw = std::log(model.weights[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < n; ++j) {
      Vector diff = data.row(j).transpose() - model.means[static_cast<std::size_t>(i)];
      logp(j, i) = logw + log_gaussian(ld, diff);
    }
  }
  return logp;
}

Matrix floor_covariance(const Matrix& cov, double floor) {
  SymEig eig = sym_eig_desc(cov);
  Matrix out = Matrix::Zero(cov.rows(), cov.cols());
  for (Index j = 0; j < eig.values.size(); ++j)
    out += std::max(eig.values(j), floor) * eig.vectors.col(j) * eig.vectors.col(j).transpose();
  return out;
}

}  // namespace

GmmModel fit_gmm(const Matrix& data, int k, const GmmOptions& opts) {
  const Index n = data.rows();
  if (k < 1) throw std::invalid_argument("fit_gmm: k must be >= 1");
  if (n < k) throw std::invalid_argument("fit_gmm: fewer samples than components");

  Vector col_means = data.colwise().mean();
  Matrix centered = data.rowwise() - col_means.transpose();
  Matrix pooled = centered.transpose() * centered / static_cast<double>(n);
  const double floor = 1e-6 * std::max(pooled.diagonal().mean(),
                                       std::numeric_limits<double>::min());
  Matrix pooled_floored = floor_covariance(pooled, floor);

  // k-means++ seeding: first center uniformly, the rest proportional to the
  // squared distance from the nearest chosen center.
  Rng rng(opts.seed);
  GmmModel model;
  model.k = k;
  std::vector<Index> centers;
  centers.push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector d2 = (data.rowwise() - data.row(centers[0])).rowwise().squaredNorm();
  while (centers.size() < static_cast<std::size_t>(k)) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0) {
      double target = rng.uniform() * total;
      double acc = 0.0;
      for (Index j = 0; j < n; ++j) {
        acc += d2(j);
        if (acc >= target) {
          pick = j;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.push_back(pick);
    d2 = d2.cwiseMin((data.rowwise() - data.row(pick)).rowwise().squaredNorm());
  }
  for (int i = 0; i < k; ++i) {
    model.weights.push_back(1.0 / k);
    model.means.push_back(data.row(centers[static_cast<std::size_t>(i)]).transpose());
    model.covariances.push_back(pooled_floored);
  }

  double loglik = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // E-step.
    Matrix logp = weighted_log_densities(model, data);
    Vector row_ls(n);
    for (Index j = 0; j < n; ++j) {
      const double mx = logp.row(j).maxCoeff();
      row_ls(j) = mx + std::log((logp.row(j).array() - mx).exp().sum());
    }
    const double next = row_ls.sum();
    model.loglik_trace.push_back(next);

    Matrix resp(n, k);
    for (Index j = 0; j < n; ++j)
      resp.row(j) = (logp.row(j).array() - row_ls(j)).exp();

    // M-step.
    for (int i = 0; i < k; ++i) {
      const double mass = resp.col(i).sum();
      if (mass < 1e-8) {
        // Collapsed component: reseed at the point the mixture explains worst.
        Index worst;
        row_ls.minCoeff(&worst);
        model.means[static_cast<std::size_t>(i)] = data.row(worst).transpose();
        model.covariances[static_cast<std::size_t>(i)] = pooled_floored;
        model.weights[static_cast<std::size_t>(i)] = 1.0 / n;
        model.reinitialized = true;
        continue;
      }
      Vector mu = (data.transpose() * resp.col(i)) / mass;
      Matrix diff = data.rowwise() - mu.transpose();
      Matrix cov = diff.transpose() * resp.col(i).asDiagonal() * diff / mass;
      model.means[static_cast<std::size_t>(i)] = mu;
      model.covariances[static_cast<std::size_t>(i)] = floor_covariance(cov, floor);
      model.weights[static_cast<std::size_t>(i)] = mass / static_cast<double>(n);
    }
    // Renormalize in case a reseed disturbed the simplex.
    double wsum = 0.0;
    for (double w : model.weights) wsum += w;
    for (double& w : model.weights) w /= wsum;

    if (iter > 0 && std::abs(next - loglik) < opts.tol * std::abs(next)) {
      model.converged = true;
      loglik = next;
      break;
    }
    loglik = next;
  }
  return model;
}

Matrix gmm_responsibilities(const GmmModel& model, const Matrix& data) {
  if (data.cols() != model.means.at(0).size())
    throw std::invalid_argument("gmm_responsibilities: dimension mismatch");
  Matrix logp = weighted_log_densities(model, data);
  Matrix resp(data.rows(), model.k);
  for (Index j = 0; j < data.rows(); ++j) {
    const double mx = logp.row(j).maxCoeff();
    const double ls = mx + std::log((logp.row(j).array() - mx).exp().sum());
    resp.row(j) = (logp.row(j).array() - ls).exp();
  }
  return resp;
}

double gmm_loglik(const GmmModel& model, const Matrix& data) {
  if (data.cols() != model.means.at(0).size())
    throw std::invalid_argument("gmm_loglik: dimension mismatch");
  Matrix logp = weighted_log_densities(model, data);
  double total = 0.0;
  for (Index j = 0; j < data.rows(); ++j) {
    const double mx = logp.row(j).maxCoeff();
    total += mx + std::log((logp.row(j).array() - mx).exp().sum());
  }
  return total;
}

}  // namespace latentis
