#pragma once

#include "latentis/types.hpp"

namespace latentis {

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// descending. Eigenvalues within -1e-10 of zero are clamped to 0; anything
/// more negative indicates a non-PSD input and is kept as-is for the caller
/// to diagnose. Each eigenvector is oriented so its largest-magnitude entry
/// is positive.
struct SymEig {
  Vector values;
  Matrix vectors;  // columns, same order as values
};
SymEig sym_eig_desc(const Matrix& sym);

/// Flip v so its largest-magnitude entry is positive (ties: first such entry).
void orient_sign(Eigen::Ref<Vector> v);

/// Inverse square root of a symmetric PSD matrix through its eigensystem.
/// Eigenvalues at or below `floor` relative to the largest are treated as
/// zero (pseudo-inverse route).
Matrix inv_sqrt_psd(const Matrix& sym, double rel_floor = 1e-12);

}  // namespace latentis
