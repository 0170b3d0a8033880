#pragma once

#include "chkp/grid.hpp"

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace chkp {

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column i pairs with values[i]; empty when not requested
};

/// Dense symmetric eigendecomposition.
SymmetricEigen symmetric_eigen(const Matrix& a, bool want_vectors = true);

/// All eigenvalues of a general real matrix. Dense QR; meant for small sizes.
std::vector<std::complex<double>> general_eigenvalues(const Matrix& a);

using LinearMap = std::function<Vector(const Vector&)>;

struct SingularValueEstimate {
  double value = 0.0;
  int steps = 0;
  bool converged = false;
};

/// Largest singular value of the operator x -> apply(x) (rows x cols) by
/// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization.
/// The start vector is fixed, so results are reproducible.
SingularValueEstimate top_singular_value(int rows, int cols, const LinearMap& apply,
                                         const LinearMap& apply_transpose, double rel_tol = 1e-11,
                                         int max_steps = 400);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Cosine similarity a.b / (|a||b|).
double cosine_similarity(const Vector& a, const Vector& b);

}  // namespace chkp
