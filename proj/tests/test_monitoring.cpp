#include <doctest.h>

#include <cmath>

#include "latentis/dataio.hpp"
#include "latentis/monitoring.hpp"
#include "latentis/rng.hpp"
#include "latentis/synth.hpp"
#include "oracles.hpp"

using namespace latentis;

namespace {

Matrix correlated_plant(std::uint64_t seed, Index n, Index m, Index latent = 4) {
  Rng wrng(seed ^ 0xdeadbeefull);
  LinearGaussianSpec spec;
  spec.W = oracles::random_matrix(wrng, m, latent);
  spec.mu = Vector::Zero(m);
  spec.psi = Vector::Constant(m, 0.3);
  spec.n = n;
  spec.seed = seed;
  auto sample = gen_linear_gaussian(spec);
  Scaler scaler = fit_scaler(sample.data.values);
  return scaler.apply(sample.data.values);
}

}  // namespace

TEST_CASE("pca statistics at characteristic points") {
  Rng rng(1);
  Matrix data = oracles::centered(oracles::random_matrix(rng, 200, 4));
  PcaModel model = fit_pca(data, 2);

  Vector zero = Vector::Zero(4);
  CHECK(t2_statistic(model, zero) == 0.0);
  CHECK(spe_statistic(model, zero) == 0.0);

  Vector along = std::sqrt(model.eigenvalues(0)) * model.loadings_p.col(0);
  CHECK(t2_statistic(model, along) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(spe_statistic(model, along) < 1e-18);

  Vector residual_dir = model.loadings_r.col(0);
  CHECK(t2_statistic(model, 2.0 * residual_dir) < 1e-18);
  CHECK(spe_statistic(model, 2.0 * residual_dir) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("t2 refuses a retained eigenvalue below the floor") {
  PcaModel degenerate;
  degenerate.k = 2;
  degenerate.loadings_p = Matrix::Identity(3, 2);
  degenerate.eigenvalues = Vector(3);
  degenerate.eigenvalues << 4.0, 1e-15, 0.0;  // second retained direction is numerically dead
  Vector x = Vector::Ones(3);
  CHECK_THROWS_AS(t2_statistic(degenerate, x), std::runtime_error);
}

TEST_CASE("ica statistics at characteristic points") {
  Rng rng(2);
  Matrix mix = oracles::random_matrix(rng, 3, 3);
  Matrix sources(3, 2000);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2000; ++j) sources(i, j) = rng.uniform() - 0.5;
  sources = sources.colwise() - sources.rowwise().mean();
  Matrix data = mix * sources;
  IcaOptions opts;
  opts.seed = 5;
  IcaModel model = fit_ica(data, 3, opts);

  Vector zero = Vector::Zero(3);
  CHECK(i2_statistic(model, zero) == 0.0);
  CHECK(qi_statistic(model, zero) == 0.0);

  // Full-rank model reconstructs any vector.
  Vector x = oracles::random_matrix(rng, 3, 1);
  CHECK(qi_statistic(model, x) < 1e-8);
}

TEST_CASE("kde control limit calibrates against the empirical quantile") {
  Rng rng(3);
  StatisticSeries series;
  series.values = Vector(10000);
  for (Index i = 0; i < 10000; ++i) series.values(i) = rng.uniform();
  ControlLimit cl = kde_control_limit(series, 0.05);
  CHECK(std::abs(cl.limit - 0.95) < 0.02);
}

TEST_CASE("kde limit is monotone decreasing in delta") {
  Rng rng(4);
  StatisticSeries series;
  series.values = Vector(2000);
  for (Index i = 0; i < 2000; ++i) series.values(i) = -std::log(1.0 - rng.uniform());
  double prev = 1e300;
  for (double delta : {0.01, 0.05, 0.1, 0.2}) {
    ControlLimit cl = kde_control_limit(series, delta);
    CHECK(cl.limit < prev);
    prev = cl.limit;
  }
}

TEST_CASE("constant training statistics degrade gracefully") {
  StatisticSeries series;
  series.values = Vector::Constant(50, 2.0);
  ControlLimit cl = kde_control_limit(series, 0.01);
  CHECK(cl.degenerate);
  CHECK(cl.limit > 2.0);
  CHECK(cl.limit < 2.0 + 1e-6);
}

TEST_CASE("kde rejects invalid inputs") {
  StatisticSeries tiny;
  tiny.values = Vector::Ones(10);
  CHECK_THROWS_AS(kde_control_limit(tiny, 0.05), std::invalid_argument);
  StatisticSeries ok;
  ok.values = Vector::Ones(50);
  CHECK_THROWS_AS(kde_control_limit(ok, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kde_control_limit(ok, 1.0), std::invalid_argument);
}

TEST_CASE("posterior hits the prior exactly at the limit") {
  ControlLimit cl;
  cl.limit = 3.7;
  FusionParams params;
  params.delta = 0.01;
  CHECK(bayes_posterior(3.7, cl, params) == 0.01);
}

TEST_CASE("posterior limits at the extremes") {
  ControlLimit cl;
  cl.limit = 2.0;
  FusionParams params;
  CHECK(bayes_posterior(0.0, cl, params) == 0.0);
  CHECK(bayes_posterior(1e12, cl, params) > 1.0 - 1e-9);
  CHECK(bayes_posterior(1e-12, cl, params) < 1e-9);
}

TEST_CASE("posterior reproduces the hand-evaluated value at S = 2 S_lim") {
  ControlLimit cl;
  cl.limit = 1.0;
  FusionParams params;
  params.mu = 1.0;
  params.delta = 0.01;
  const double expected =
      0.01 * std::exp(-0.5) / (0.99 * std::exp(-2.0) + 0.01 * std::exp(-0.5));
  const double got = bayes_posterior(2.0, cl, params);
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(got - 0.04335) < 1e-4);
}

TEST_CASE("posterior is strictly increasing in the statistic") {
  ControlLimit cl;
  cl.limit = 5.0;
  FusionParams params;
  params.delta = 0.05;
  params.mu = 2.0;
  double prev = -1.0;
  for (double s = 0.1; s < 50.0; s *= 1.5) {
    const double p = bayes_posterior(s, cl, params);
    CHECK(p > prev);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    prev = p;
  }
}

TEST_CASE("posterior depends only on the ratio S over the limit") {
  FusionParams params;
  for (double c : {0.5, 3.0, 700.0}) {
    ControlLimit base;
    base.limit = 1.3;
    ControlLimit scaled;
    scaled.limit = 1.3 * c;
    const double a = bayes_posterior(2.9, base, params);
    const double b = bayes_posterior(2.9 * c, scaled, params);
    CHECK(std::abs(a - b) < 1e-12);
  }
}

TEST_CASE("fusion of agreeing and disagreeing layers matches the rule") {
  FusionParams params;
  params.delta = 0.5;
  params.eta = 0.1;
  params.window = 10;
  std::vector<double> posteriors{0.9, 0.2, 0.9};
  std::vector<std::vector<double>> history{{0.9}, {0.2}, {0.9}};
  const double dbs = weight_and_fuse(posteriors, history, params);
  const double expected = (9.0 + 0.02 + 9.0) / 20.1;
  CHECK(dbs == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(dbs - 0.89652) < 1e-5);
}

TEST_CASE("fusing constants returns the constant exactly") {
  FusionParams params;
  params.delta = 0.3;
  params.eta = 0.05;
  std::vector<double> posteriors{0.3777, 0.3777, 0.3777};
  CHECK(weight_and_fuse(posteriors, {}, params) == 0.3777);
  CHECK(weight_and_fuse({0.123}, {}, params) == 0.123);
  CHECK(fuse_odbs({0.61, 0.61}, {}, params) == 0.61);
}

TEST_CASE("odbs fusion reproduces the worked example") {
  FusionParams params;
  params.delta = 0.5;
  params.eta = 0.1;
  std::vector<double> dbs{0.9, 0.9, 0.01, 0.01};
  std::vector<std::vector<double>> history{{0.9}, {0.9}, {0.01}, {0.01}};
  const double odbs = fuse_odbs(dbs, history, params);
  const double expected = (9.0 + 9.0 + 0.001 + 0.001) / 20.2;
  CHECK(odbs == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fusion stays inside the convex hull of its inputs") {
  Rng rng(6);
  FusionParams params;
  params.delta = 0.2;
  params.eta = 0.02;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> cur;
    std::vector<std::vector<double>> hist;
    const int L = 1 + static_cast<int>(rng.below(5));
    for (int l = 0; l < L; ++l) {
      cur.push_back(rng.uniform());
      std::vector<double> h;
      const int len = static_cast<int>(rng.below(4));
      for (int i = 0; i < len; ++i) h.push_back(rng.uniform());
      hist.push_back(h);
    }
    const double dbs = weight_and_fuse(cur, hist, params);
    const double lo = *std::min_element(cur.begin(), cur.end());
    const double hi = *std::max_element(cur.begin(), cur.end());
    CHECK(dbs >= lo - 1e-15);
    CHECK(dbs <= hi + 1e-15);
  }
}

TEST_CASE("empty history falls back to the current posterior") {
  FusionParams params;
  params.delta = 0.5;
  params.eta = 0.1;
  // Above the prior with no history: weight 1/eta on its own says fault.
  std::vector<double> high{0.9, 0.1};
  const double dbs = weight_and_fuse(high, {{}, {}}, params);
  const double expected = (10.0 * 0.9 + 0.1 * 0.1) / 10.1;
  CHECK(dbs == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fusion rejects invalid inputs") {
  FusionParams params;
  CHECK_THROWS_AS(weight_and_fuse({}, {}, params), std::invalid_argument);
  FusionParams bad;
  bad.delta = 0.0;
  CHECK_THROWS_AS(weight_and_fuse({0.5}, {}, bad), std::invalid_argument);
}

TEST_CASE("a depth-1 detector is classic monitoring with four limits") {
  Matrix train = correlated_plant(100, 400, 8);
  DpiOptions opts;
  opts.depth = 1;
  opts.ica_cap = 3;
  DeepDetector det = build_dpi(train, opts);
  CHECK(det.depth == 1);
  CHECK(det.pca_layers.size() == 1);
  CHECK(det.ica_layers.size() == 1);
  CHECK(det.limits.size() == 1);
  for (const auto& cl : det.limits[0]) CHECK(cl.limit > 0.0);
}

TEST_CASE("layer dimensions never grow along the chain") {
  Matrix train = correlated_plant(200, 600, 20);
  DpiOptions opts;
  opts.depth = 3;
  opts.cpv = 0.90;
  opts.ica_cap = 8;
  DeepDetector det = build_dpi(train, opts);
  for (int l = 1; l < 3; ++l) {
    CHECK(det.pca_layers[static_cast<std::size_t>(l)].k <=
          det.pca_layers[static_cast<std::size_t>(l - 1)].k);
    CHECK(det.ica_layers[static_cast<std::size_t>(l)].k <=
          det.ica_layers[static_cast<std::size_t>(l - 1)].k);
  }
}

TEST_CASE("stored training features equal composed transforms") {
  Matrix train = correlated_plant(300, 200, 10);
  DpiOptions opts;
  opts.depth = 3;
  opts.ica_cap = 4;
  opts.ica_ks = {4, 3, 2};
  DpiTrainingTrace trace;
  DeepDetector det = build_dpi(train, opts, &trace);

  Matrix t = train;
  for (int l = 0; l < det.depth; ++l) {
    t = pca_transform(det.pca_layers[static_cast<std::size_t>(l)], t);
    CHECK((t - trace.pca_features[static_cast<std::size_t>(l)]).cwiseAbs().maxCoeff() < 1e-8);
  }
  Matrix e = pca_residual(det.pca_layers[0], train).transpose();
  Matrix s = e;
  for (int l = 0; l < det.depth; ++l) {
    s = ica_sources(det.ica_layers[static_cast<std::size_t>(l)], s);
    CHECK((s - trace.ica_sources[static_cast<std::size_t>(l)]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("detector collapse reports the achievable depth") {
  // A noiseless rank-2 plant in 3 variables: retaining both real components
  // leaves an exactly zero residual, so the source branch has nothing left.
  Rng rng(991);
  LinearGaussianSpec spec;
  spec.W = Matrix(3, 2);
  spec.W << 1, 0, 0, 1, 1, 1;
  spec.mu = Vector::Zero(3);
  spec.psi = Vector::Zero(3);
  spec.n = 200;
  spec.seed = 44;
  auto sample = gen_linear_gaussian(spec);
  Matrix train = fit_scaler(sample.data.values).apply(sample.data.values);

  DpiOptions opts;
  opts.depth = 2;
  opts.cpv = 0.999;
  try {
    build_dpi(train, opts);
    FAIL("expected collapse");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("achievable depth") != std::string::npos);
  }
}

TEST_CASE("detection is deterministic given frozen stream state") {
  Matrix train = correlated_plant(500, 400, 10);
  DpiOptions opts;
  opts.depth = 2;
  opts.ica_ks = {5, 3};
  DeepDetector det = build_dpi(train, opts);

  Vector x = train.row(7).transpose();
  DetectorState state;
  detect(det, train.row(3).transpose(), state);  // accumulate some history
  DetectorState frozen = state;
  DetectionRecord a = detect(det, x, state);
  DetectionRecord b = detect(det, x, frozen);
  CHECK(a.odbs == b.odbs);
  CHECK((a.posteriors - b.posteriors).cwiseAbs().maxCoeff() == 0.0);
  for (int kind = 0; kind < kStatKinds; ++kind)
    CHECK(a.dbs[static_cast<std::size_t>(kind)] == b.dbs[static_cast<std::size_t>(kind)]);
}

TEST_CASE("a gross shift on half the variables is flagged") {
  Matrix train = correlated_plant(600, 1000, 12);
  DpiOptions opts;
  opts.depth = 3;
  opts.ica_ks = {6, 4, 2};
  DeepDetector det = build_dpi(train, opts);

  DetectorState state;
  Vector x = train.row(11).transpose();
  for (Index j = 0; j < 6; ++j) x(j) += 10.0;  // +10 sigma in scaled units
  // Feed it a few times so the windowed mean agrees with the spike.
  DetectionRecord rec{};
  for (int t = 0; t < 3; ++t) rec = detect(det, x, state);
  CHECK(rec.is_fault);
  CHECK(rec.odbs >= det.params.delta);
}

TEST_CASE("detect validates dimensions and state") {
  Matrix train = correlated_plant(700, 300, 6);
  DpiOptions opts;
  opts.depth = 2;
  opts.ica_cap = 2;
  DeepDetector det = build_dpi(train, opts);
  DetectorState state;
  Vector wrong = Vector::Zero(5);
  CHECK_THROWS_AS(detect(det, wrong, state), std::invalid_argument);
  DeepDetector empty;
  CHECK_THROWS_AS(detect(empty, wrong, state), std::invalid_argument);
}
