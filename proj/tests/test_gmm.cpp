#include <doctest.h>

#include "latentis/gmm.hpp"
#include "latentis/rng.hpp"
#include "latentis/synth.hpp"
#include "oracles.hpp"

using namespace latentis;

namespace {

bool trace_non_decreasing(const std::vector<double>& trace, double rel_tol = 1e-8) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] < trace[i - 1] - rel_tol * std::abs(trace[i - 1])) return false;
  return true;
}

}  // namespace

TEST_CASE("a single component reduces to sample moments after one step") {
  Rng rng(1);
  Matrix data = oracles::random_matrix(rng, 100, 3);
  GmmOptions opts;
  opts.max_iter = 1;
  GmmModel model = fit_gmm(data, 1, opts);

  Vector mean = data.colwise().mean();
  Matrix centered = data.rowwise() - mean.transpose();
  Matrix cov = centered.transpose() * centered / 100.0;  // population normalization
  CHECK(model.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((model.means[0] - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((model.covariances[0] - cov).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("well-separated components are recovered") {
  MixtureSpec spec;
  spec.weights = {0.5, 0.5};
  spec.means = {Vector::Zero(2), Vector::Constant(2, 10.0)};
  spec.covariances = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  spec.n = 1000;
  spec.seed = 77;
  auto sample = gen_gmm(spec);

  GmmOptions opts;
  opts.seed = 5;
  GmmModel model = fit_gmm(sample.data.values, 2, opts);

  // Match fitted components to the truth by nearest mean.
  for (const Vector& truth : spec.means) {
    double best = 1e9;
    int arg = 0;
    for (int i = 0; i < 2; ++i) {
      const double d = (model.means[static_cast<std::size_t>(i)] - truth).norm();
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    CHECK(best < 0.2);
    CHECK(std::abs(model.weights[static_cast<std::size_t>(arg)] - 0.5) < 0.05);
  }
}

TEST_CASE("gmm log-likelihood trace never decreases") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(500 + seed);
    Matrix data = oracles::random_matrix(rng, 150, 2);
    data.topRows(75).array() += 3.0;
    GmmOptions opts;
    opts.seed = seed;
    GmmModel model = fit_gmm(data, 3, opts);
    CHECK(trace_non_decreasing(model.loglik_trace));
  }
}

TEST_CASE("responsibilities are a proper posterior") {
  Rng rng(9);
  Matrix data = oracles::random_matrix(rng, 60, 2);
  GmmOptions opts;
  opts.seed = 1;
  GmmModel model = fit_gmm(data, 3, opts);
  Matrix resp = gmm_responsibilities(model, data);
  for (Index i = 0; i < resp.rows(); ++i)
    CHECK(resp.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));

  GmmModel single = fit_gmm(data, 1, opts);
  Matrix ones = gmm_responsibilities(single, data);
  CHECK((ones.array() == 1.0).all());
}

TEST_CASE("a sample at a distant component mean is assigned decisively") {
  GmmModel model;
  model.k = 2;
  model.weights = {0.5, 0.5};
  model.means = {Vector::Zero(2), Vector::Constant(2, 20.0)};
  model.covariances = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  Matrix x = Matrix::Zero(1, 2);
  Matrix resp = gmm_responsibilities(model, x);
  CHECK(resp(0, 0) > 0.999);
}

TEST_CASE("log-space likelihood matches the naive density sum") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(600 + seed);
    Matrix data = oracles::random_matrix(rng, 20, 2);
    GmmOptions opts;
    opts.seed = seed;
    opts.max_iter = 20;
    GmmModel model = fit_gmm(data, 3, opts);
    const double fast = gmm_loglik(model, data);
    const double naive = oracles::naive_gmm_loglik(model, data);
    CHECK(std::abs(fast - naive) < 1e-10 * std::max(1.0, std::abs(naive)));
  }
}

TEST_CASE("fixed seeds give bit-identical mixtures") {
  Rng rng(11);
  Matrix data = oracles::random_matrix(rng, 90, 2);
  GmmOptions opts;
  opts.seed = 42;
  GmmModel a = fit_gmm(data, 2, opts);
  GmmModel b = fit_gmm(data, 2, opts);
  for (int i = 0; i < 2; ++i) {
    CHECK((a.means[static_cast<std::size_t>(i)] - b.means[static_cast<std::size_t>(i)])
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(a.weights[static_cast<std::size_t>(i)] == b.weights[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("gmm validates its arguments") {
  Rng rng(13);
  Matrix data = oracles::random_matrix(rng, 5, 2);
  CHECK_THROWS_AS(fit_gmm(data, 6), std::invalid_argument);
  CHECK_THROWS_AS(fit_gmm(data, 0), std::invalid_argument);
  GmmModel model = fit_gmm(data, 1);
  Matrix wrong(3, 5);
  wrong.setZero();
  CHECK_THROWS_AS(gmm_loglik(model, wrong), std::invalid_argument);
}
