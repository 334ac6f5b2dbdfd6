#include <doctest.h>

#include "latentis/cca.hpp"
#include "latentis/pls.hpp"
#include "latentis/rng.hpp"
#include "oracles.hpp"

using namespace latentis;

TEST_CASE("a perfect linear relation gives correlation one") {
  Rng rng(1);
  Matrix X = oracles::centered(oracles::random_matrix(rng, 50, 1));
  Matrix Y = 3.0 * X;
  CcaModel model = fit_cca(X, Y, 1);
  CHECK(model.correlations(0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("independent blocks show only sampling-level correlation") {
  Rng rng(2);
  Matrix X = oracles::random_matrix(rng, 10000, 4);
  Matrix Y = oracles::random_matrix(rng, 10000, 3);
  CcaModel model = fit_cca(X, Y, 3);
  for (int j = 0; j < 3; ++j) CHECK(model.correlations(j) < 0.1);
}

TEST_CASE("projections satisfy both eigenvalue problems") {
  Rng rng(3);
  Matrix X = oracles::centered(oracles::random_matrix(rng, 300, 4));
  Matrix Y = oracles::centered(oracles::random_matrix(rng, 300, 3));
  Y.col(0) += X.col(0);
  Y.col(1) += 0.5 * X.col(1);
  CcaModel model = fit_cca(X, Y, 2);

  Matrix Sxx = X.transpose() * X;
  Matrix Syy = Y.transpose() * Y;
  Matrix Sxy = X.transpose() * Y;
  Matrix Mx = Sxx.inverse() * Sxy * Syy.inverse() * Sxy.transpose();
  Matrix My = Syy.inverse() * Sxy.transpose() * Sxx.inverse() * Sxy;
  for (int j = 0; j < 2; ++j) {
    const double lam2 = model.correlations(j) * model.correlations(j);
    Vector p = model.proj_x.col(j);
    Vector q = model.proj_y.col(j);
    CHECK((Mx * p - lam2 * p).norm() < 1e-8 * p.norm());
    CHECK((My * q - lam2 * q).norm() < 1e-8 * q.norm());
  }
}

TEST_CASE("training scores reproduce the stored correlations") {
  Rng rng(4);
  Matrix X = oracles::centered(oracles::random_matrix(rng, 500, 5));
  Matrix Y = oracles::centered(oracles::random_matrix(rng, 500, 4));
  Y.col(2) += 2.0 * X.col(3);
  CcaModel model = fit_cca(X, Y, 3);
  auto [U, V] = cca_transform(model, X, Y);
  for (int j = 0; j < 3; ++j) {
    const double corr = U.col(j).dot(V.col(j)) / (U.col(j).norm() * V.col(j).norm());
    CHECK(std::abs(corr - model.correlations(j)) < 1e-8);
  }
}

TEST_CASE("transform is linear: zero rows map to zero rows") {
  Rng rng(5);
  Matrix X = oracles::centered(oracles::random_matrix(rng, 30, 3));
  Matrix Y = oracles::centered(oracles::random_matrix(rng, 30, 3));
  CcaModel model = fit_cca(X, Y, 2);
  Matrix xz = Matrix::Zero(2, 3);
  Matrix yz = Matrix::Zero(2, 3);
  auto [U, V] = cca_transform(model, xz, yz);
  CHECK(U.cwiseAbs().maxCoeff() == 0.0);
  CHECK(V.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reconstruction residual shrinks as components are added") {
  Rng rng(6);
  Matrix X = oracles::centered(oracles::random_matrix(rng, 200, 4));
  Matrix Y = oracles::centered(oracles::random_matrix(rng, 200, 4));
  Y += 0.7 * X;
  double prev = X.squaredNorm();
  for (int k = 1; k <= 4; ++k) {
    CcaModel model = fit_cca(X, Y, k);
    Matrix U = X * model.proj_x;
    Matrix theta = (U.transpose() * U).ldlt().solve(U.transpose() * X);
    const double residual = (X - U * theta).squaredNorm();
    CHECK(residual <= prev + 1e-9);
    prev = residual;
  }
}

TEST_CASE("correlations live in the unit interval") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(700 + seed);
    Matrix X = oracles::random_matrix(rng, 80, 4);
    Matrix Y = oracles::random_matrix(rng, 80, 3);
    Y.col(0) += X.col(0);
    CcaModel model = fit_cca(X, Y, 3);
    for (int j = 0; j < 3; ++j) {
      CHECK(model.correlations(j) >= 0.0);
      CHECK(model.correlations(j) <= 1.0 + 1e-10);
    }
  }
}

TEST_CASE("cca and pls coincide on orthonormal blocks") {
  // Zero-mean orthonormal columns: QR of [ones | G] with the ones column
  // dropped, so the models' internal recentering is a no-op.
  Rng rng(8);
  const auto orthonormal_centered = [&](Index n, Index m) {
    Matrix g(n, m + 1);
    g.col(0).setOnes();
    g.rightCols(m) = oracles::random_matrix(rng, n, m);
    Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(n, m + 1);
    return Matrix(q.rightCols(m));
  };
  Matrix X = orthonormal_centered(100, 3);
  // Correlate Y with X at graded strengths so the singular values separate.
  Matrix g(100, 4);
  g.col(0).setOnes();
  g.col(1) = X.col(0) + 0.1 * oracles::random_matrix(rng, 100, 1);
  g.col(2) = X.col(1) + 0.7 * oracles::random_matrix(rng, 100, 1);
  g.col(3) = oracles::random_matrix(rng, 100, 1);
  Matrix qy = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(100, 4);
  Matrix Y = qy.rightCols(3);

  CcaModel cca = fit_cca(X, Y, 2);
  PlsModel pls = fit_pls(X, Y, 2);
  for (int j = 0; j < 2; ++j) {
    Vector pc = cca.proj_x.col(j).normalized();
    Vector pp = pls.x_weights.col(j);
    const double align = std::abs(pc.dot(pp));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("cca validates its arguments") {
  Rng rng(9);
  Matrix X = oracles::random_matrix(rng, 20, 3);
  Matrix Y = oracles::random_matrix(rng, 20, 2);
  CHECK_THROWS_AS(fit_cca(X, Y, 3), std::invalid_argument);
  Matrix Yshort = oracles::random_matrix(rng, 10, 2);
  CHECK_THROWS_AS(fit_cca(X, Yshort, 1), std::invalid_argument);
  Matrix Xzero = Matrix::Zero(20, 3);
  CHECK_THROWS_AS(fit_cca(Xzero, Y, 1), std::invalid_argument);
}
