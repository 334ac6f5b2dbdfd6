#include <doctest.h>

#include "latentis/ica.hpp"
#include "latentis/rng.hpp"
#include "oracles.hpp"

using namespace latentis;

namespace {

// Centered uniform sources, variables by samples.
Matrix uniform_sources(Rng& rng, Index k, Index n) {
  Matrix s(k, n);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < n; ++j) s(i, j) = rng.uniform() - 0.5;
  return s.colwise() - s.rowwise().mean();
}

}  // namespace

TEST_CASE("whitening of already-white data is orthogonal") {
  Rng rng(2);
  Matrix raw = oracles::random_matrix(rng, 4, 600);
  raw = raw.colwise() - raw.rowwise().mean();
  Matrix z0 = whiten(raw, 4).Z;  // exactly identity covariance now
  WhitenResult again = whiten(z0, 4);
  Matrix vvt = again.V * again.V.transpose();
  CHECK((vvt - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
  Matrix cov = again.Z * again.Z.transpose() / 600.0;
  CHECK((cov - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("whitening a diagonal covariance rescales the axes") {
  Matrix data(2, 4);
  data << 2, -2, 2, -2,
          1, -1, -1, 1;  // second moment diag(4, 1) exactly
  WhitenResult w = whiten(data, 2);
  Matrix expected(2, 2);
  expected << 0.5, 0, 0, 1;
  CHECK((w.V - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("whitened covariance is the identity for full-rank input") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(50 + seed);
    Matrix mix = oracles::random_matrix(rng, 5, 5);
    Matrix data = mix * uniform_sources(rng, 5, 800);
    WhitenResult w = whiten(data, 5);
    Matrix cov = w.Z * w.Z.transpose() / 800.0;
    CHECK((cov - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("whitening detects rank deficiency") {
  Rng rng(9);
  Matrix row = oracles::random_matrix(rng, 1, 100);
  Matrix data(2, 100);
  data.row(0) = row;
  data.row(1) = 2.0 * row;
  CHECK_THROWS_AS(whiten(data, 2), std::runtime_error);
}

TEST_CASE("identity mixing is recovered up to permutation and scale") {
  Rng rng(101);
  Matrix sources = uniform_sources(rng, 2, 4000);
  IcaOptions opts;
  opts.seed = 7;
  IcaModel model = fit_ica(sources, 2, opts);
  Matrix shat = ica_sources(model, sources);

  // Each recovered row should align with exactly one true source.
  for (Index i = 0; i < 2; ++i) {
    double best = 0.0;
    for (Index j = 0; j < 2; ++j) {
      const double corr = std::abs(shat.row(i).dot(sources.row(j))) /
                          (shat.row(i).norm() * sources.row(j).norm());
      best = std::max(best, corr);
    }
    CHECK(best > 0.99);
  }
}

TEST_CASE("a known mixture is unmixed with strong per-row dominance") {
  Rng rng(202);
  Matrix sources = uniform_sources(rng, 2, 10000);
  Matrix mixing(2, 2);
  mixing << 1, 0.5, 0.5, 1;
  Matrix data = mixing * sources;

  IcaOptions opts;
  opts.seed = 3;
  IcaModel model = fit_ica(data, 2, opts);
  CHECK(model.converged);

  Matrix gain = model.separating * mixing;  // should approach a scaled permutation
  for (Index i = 0; i < 2; ++i) {
    Vector row = gain.row(i).cwiseAbs();
    const double hi = row.maxCoeff();
    const double lo = row.minCoeff();
    CHECK(hi / std::max(lo, 1e-300) > 5.0);
  }
}

TEST_CASE("gaussian sources are reported as unconverged or ambiguous") {
  Rng rng(303);
  Matrix data = oracles::random_matrix(rng, 2, 4000);
  data = data.colwise() - data.rowwise().mean();
  IcaOptions opts;
  opts.seed = 11;
  IcaModel model = fit_ica(data, 2, opts);
  CHECK((!model.converged || model.ambiguous));
}

TEST_CASE("non-gaussian sources are not flagged ambiguous") {
  Rng rng(304);
  Matrix data(2, 4000);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 4000; ++j) data(i, j) = rng.uniform() - 0.5;
  data = data.colwise() - data.rowwise().mean();
  IcaOptions opts;
  opts.seed = 12;
  IcaModel model = fit_ica(data, 2, opts);
  CHECK_FALSE(model.ambiguous);
}

TEST_CASE("sources are the separating matrix applied to the data") {
  IcaModel model;
  model.k = 2;
  model.separating = Matrix::Identity(2, 2);
  model.mixing = Matrix::Identity(2, 2);
  model.whitening = Matrix::Identity(2, 2);
  Rng rng(5);
  Matrix data = oracles::random_matrix(rng, 2, 20);
  CHECK((ica_sources(model, data) - data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("training sources are reproducible and reconstruction is tight at full rank") {
  Rng rng(404);
  Matrix mix = oracles::random_matrix(rng, 3, 3);
  Matrix data = mix * uniform_sources(rng, 3, 3000);

  IcaOptions opts;
  opts.seed = 19;
  IcaModel model = fit_ica(data, 3, opts);
  Matrix s1 = ica_sources(model, data);
  Matrix s2 = ica_sources(model, data);
  CHECK((s1 - s2).cwiseAbs().maxCoeff() == 0.0);

  // Full-rank model: mixing * separating acts as the identity.
  Matrix recon = model.mixing * s1;
  CHECK((recon - data).cwiseAbs().maxCoeff() < 1e-8 * data.cwiseAbs().maxCoeff());
  Matrix wa = model.separating * model.mixing;
  CHECK((wa - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fixed seeds give bit-identical models") {
  Rng rng(505);
  Matrix data = Matrix(2, 2000);
  for (Index j = 0; j < 2000; ++j) {
    data(0, j) = rng.uniform() - 0.5;
    data(1, j) = 0.4 * data(0, j) + 0.6 * (rng.uniform() - 0.5);
  }
  data = data.colwise() - data.rowwise().mean();
  IcaOptions opts;
  opts.seed = 99;
  IcaModel a = fit_ica(data, 2, opts);
  IcaModel b = fit_ica(data, 2, opts);
  CHECK((a.separating - b.separating).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.mixing - b.mixing).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ica validates its arguments") {
  Rng rng(6);
  Matrix data = oracles::random_matrix(rng, 3, 50);
  CHECK_THROWS_AS(fit_ica(data, 0), std::invalid_argument);
  CHECK_THROWS_AS(fit_ica(data, 4), std::invalid_argument);
  Matrix few = oracles::random_matrix(rng, 10, 5);
  CHECK_THROWS_AS(fit_ica(few, 2), std::invalid_argument);
}
