#include "chkp/linalg.hpp"

#include "chkp/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace chkp {

namespace {

// Largest eigenvalue of the symmetric tridiagonal (diag, off) and its unit
// eigenvector, the latter by inverse iteration with a shift just above it.
Vector top_tridiagonal_pair(const Vector& diag, const Vector& off, double& top) {
  const int m = static_cast<int>(diag.size());
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(diag, off.head(std::max(m - 1, 0)), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("tridiagonal eigensolve failed in Lanczos bidiagonalization");
  top = es.eigenvalues()[m - 1];
  if (m == 1) return Vector::Ones(1);
  const double scale = std::max(std::abs(top), es.eigenvalues().cwiseAbs().maxCoeff());
  const double sigma = top + 1e-10 * scale + std::numeric_limits<double>::min();
  // sigma - T is positive definite: LDL^T without pivoting is stable.
  Vector d(m), l(m);
  d[0] = sigma - diag[0];
  for (int i = 1; i < m; ++i) {
    l[i] = -off[i - 1] / d[i - 1];
    d[i] = sigma - diag[i] - l[i] * (-off[i - 1]);
  }
  Vector x = Vector::Ones(m);
  for (int it = 0; it < 3; ++it) {
    for (int i = 1; i < m; ++i) x[i] -= l[i] * x[i - 1];
    for (int i = 0; i < m; ++i) x[i] /= d[i];
    for (int i = m - 2; i >= 0; --i) x[i] -= l[i + 1] * x[i + 1];
    x /= x.norm();
  }
  return x;
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& a, bool want_vectors) {
  if (a.rows() != a.cols()) throw ParameterError("symmetric_eigen needs a square matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("dense symmetric eigensolve did not converge");
  SymmetricEigen out;
  out.values = es.eigenvalues();
  if (want_vectors) out.vectors = es.eigenvectors();
  return out;
}

std::vector<std::complex<double>> general_eigenvalues(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw SolverError("dense nonsymmetric eigensolve did not converge");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

SingularValueEstimate top_singular_value(int rows, int cols, const LinearMap& apply,
                                         const LinearMap& apply_transpose, double rel_tol, int max_steps) {
  const int kmax = std::min({max_steps, rows, cols});
  Matrix v(cols, kmax + 1);
  Matrix u(rows, kmax);
  std::vector<double> alpha, beta;

  Vector start(cols);
  for (int i = 0; i < cols; ++i) start[i] = 1.0 + 0.5 * std::sin(0.7 * i + 0.3);
  v.col(0) = start.normalized();

  SingularValueEstimate est;
  for (int k = 0; k < kmax; ++k) {
    Vector uk = apply(v.col(k));
    if (k > 0) uk -= beta.back() * u.col(k - 1);
    for (int pass = 0; pass < 2 && k > 0; ++pass) uk -= u.leftCols(k) * (u.leftCols(k).transpose() * uk);
    const double a = uk.norm();
    alpha.push_back(a);
    if (a == 0.0) break;
    u.col(k) = uk / a;

    Vector vk = apply_transpose(u.col(k)) - a * v.col(k);
    for (int pass = 0; pass < 2; ++pass) vk -= v.leftCols(k + 1) * (v.leftCols(k + 1).transpose() * vk);
    const double b = vk.norm();
    beta.push_back(b);

    // Largest eigenpair of the tridiagonal B^T B of the upper bidiagonal B.
    const int m = k + 1;
    Vector diag(m), off(m), z;
    for (int i = 0; i < m; ++i) {
      diag[i] = alpha[i] * alpha[i] + (i > 0 ? beta[i - 1] * beta[i - 1] : 0.0);
      off[i] = i + 1 < m ? alpha[i] * beta[i] : 0.0;
    }
    double top = 0.0;
    z = top_tridiagonal_pair(diag, off, top);
    top = std::max(top, 0.0);
    const double sigma = std::sqrt(top);
    est.value = sigma;
    est.steps = m;
    // A^T A V = V T + alpha_m beta_m v_{m+1} e_m^T bounds the Ritz value error.
    const double ritz_residual = a * b * std::abs(z[m - 1]);
    if (b <= 1e-14 * sigma || ritz_residual <= rel_tol * top) {
      est.converged = true;
      break;
    }
    v.col(k + 1) = vk / b;
  }
  if (est.steps == std::min(rows, cols)) est.converged = true;
  return est;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("loglog_slope needs >= 2 matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double cosine_similarity(const Vector& a, const Vector& b) { return a.dot(b) / (a.norm() * b.norm()); }

}  // namespace chkp
