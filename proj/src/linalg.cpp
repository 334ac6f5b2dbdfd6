#include "latentis/linalg.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace latentis {

void orient_sign(Eigen::Ref<Vector> v) {
  Index imax = 0;
  double amax = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > amax) {
      amax = a;
      imax = i;
    }
  }
  if (v(imax) < 0) v = -v;
}

SymEig sym_eig_desc(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigendecomposition failed");
  const Index m = sym.rows();
  SymEig out;
  out.values = Vector(m);
  out.vectors = Matrix(m, m);
  // Eigen returns ascending order.
  for (Index j = 0; j < m; ++j) {
    double v = es.eigenvalues()(m - 1 - j);
    if (v < 0 && v > -1e-10) v = 0.0;
    out.values(j) = v;
    out.vectors.col(j) = es.eigenvectors().col(m - 1 - j);
    orient_sign(out.vectors.col(j));
  }
  return out;
}

Matrix inv_sqrt_psd(const Matrix& sym, double rel_floor) {
  SymEig eig = sym_eig_desc(sym);
  const double cutoff = eig.values(0) > 0 ? eig.values(0) * rel_floor : 0.0;
  Matrix out = Matrix::Zero(sym.rows(), sym.cols());
  for (Index j = 0; j < eig.values.size(); ++j) {
    if (eig.values(j) > cutoff && eig.values(j) > 0) {
      out += eig.vectors.col(j) * eig.vectors.col(j).transpose() / std::sqrt(eig.values(j));
    }
  }
  return out;
}

}  // namespace latentis
