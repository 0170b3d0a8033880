#pragma once

// Periodic-in-y solutions of  -L psi + N(psi) + psi_yy = 0,  odd in x, as
// truncated cosine series  psi(x, y) = sum_{m=0}^{Ny} a_m(x) cos(m omega y),
// continued in the amplitude s = <a_1, phi_lambda> from the bifurcation at
// omega0 = sqrt|lambda|.

#include "chkp/operators.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>
#include <string>
#include <vector>

namespace chkp {

struct LinearMode {
  GridFunction phi;  // unit discrete L2 norm, first significant entry positive
  double lambda = 0.0;
  double omega0 = 0.0;
  double residual = 0.0;  // ||(L + omega0^2) phi||
};

/// Negative eigenpair of L on odd functions. Throws SolverError when L does
/// not have exactly one negative eigenvalue.
LinearMode linear_mode(const OperatorL& L, const Grid& grid);

struct PeriodicSolution {
  std::vector<GridFunction> modes;  // a_0 .. a_Ny, all odd
  double omega = 0.0;
  double s = 0.0;
  int newton_iters = 0;
  double final_residual = 0.0;
  std::vector<double> history;  // residual norm before each Newton update and at exit

  int harmonics() const { return static_cast<int>(modes.size()) - 1; }
  Vector mode_norms(const Grid& grid) const;
};

/// Odd samples on the grid with 2n nodes: coarse primary values at the
/// even-numbered fine nodes, interpolated values at the dual nodes between.
Vector refine_odd(const Grid& coarse, const Vector& values);

/// Zero modes a_0..a_Ny at frequency omega.
PeriodicSolution zero_solution(const Grid& grid, int ny, double omega, double s);

struct ModalResidual {
  std::vector<Vector> modes;  // R_m = -L a_m - m^2 omega^2 a_m + [N(psi)]_m
  double amplitude = 0.0;     // <a_1, phi> - s
};

/// The Fourier-reduced equation for a fixed grid, operator and linear mode.
///
/// N(psi) is evaluated at the 2 Ny + 1 stations theta_j = pi j / (2 Ny) of the
/// half period and projected back by the trapezoid rule, which is exact for
/// the products of two series of degree Ny.
///
/// Residual norms are reported after the smoothing P = (L + 2|lambda|)^{-1},
/// applied mode by mode, i.e. in a discrete H^{-4}-type norm; the raw L2 norm
/// of R_m carries rounding of size eps ||L|| ||a_m||.
class ModalProblem {
 public:
  ModalProblem(const OperatorL& L, const Grid& grid, LinearMode mode, int ny);

  const Grid& grid() const { return grid_; }
  const OperatorL& L() const { return L_; }
  const LinearMode& mode() const { return mode_; }
  int harmonics() const { return ny_; }
  int stations() const { return ny_ * 2 + 1; }
  int unknowns() const { return grid_.n * (ny_ + 1) + 1; }

  ModalResidual residual(const PeriodicSolution& state) const;
  /// Stacked smoothed norm sqrt(sum_m ||P R_m||^2 + defect^2).
  double norm(const ModalResidual& r) const;
  /// Stacked discrete L2 norm without smoothing.
  double raw_norm(const ModalResidual& r) const;

  /// Unknowns interleaved as x-node k, mode m -> k (Ny + 1) + m, omega last.
  Vector pack(const PeriodicSolution& state) const;
  void unpack(const Vector& x, PeriodicSolution& state) const;
  Vector pack(const ModalResidual& r) const;

  /// Jacobian of pack(residual) with respect to pack(state). The sparsity
  /// pattern does not depend on the state.
  SparseMatrix jacobian(const PeriodicSolution& state) const;

  /// Newton correction -J^{-1} r. The LU ordering is computed once per
  /// problem; the numeric factorization is redone for every call.
  Vector newton_step(const PeriodicSolution& state, const ModalResidual& r) const;

  /// Coefficients [N(psi)]_0..Ny of the collocated nonlinearity.
  std::vector<Vector> nonlinear_modes(const PeriodicSolution& state) const;

 private:
  void check(const PeriodicSolution& state) const;
  void build_pattern();
  Matrix stations_of(const std::vector<GridFunction>& modes) const;  // n x (J + 1)

  struct Contribution {
    int pos;  // index into the block pattern values
    int node;  // dual node carrying the coefficient
    double weight;
  };

  OperatorL L_;
  Grid grid_;
  LinearMode mode_;
  int ny_;
  OddCalculus calc_;
  Matrix synth_;    // (J + 1) x (Ny + 1): cos(m theta_j)
  Matrix project_;  // (Ny + 1) x (J + 1): trapezoid projection onto cos(m theta)
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> smoother_;
  double shift_ = 0.0;

  // Every (m, m') block of dN shares one n x n pattern; entries are linear in
  // the three station-weighted coefficient vectors of D_eo diag(.) {T D2, D3, D1}.
  SparseMatrix block_pattern_;
  std::vector<Contribution> terms_[3];
  std::vector<int> l_pos_, diag_pos_;
  SparseMatrix jacobian_pattern_;  // zero values, fixed structure
  std::shared_ptr<Eigen::SparseLU<SparseMatrix, Eigen::AMDOrdering<int>>> lu_;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 10;
};

/// Newton on (a_0..a_Ny, omega) with the amplitude equation closing the
/// system. Throws SolverError (with the residual history) on non-convergence
/// or a singular Jacobian.
PeriodicSolution newton_correct(const ModalProblem& problem, PeriodicSolution guess, const NewtonOptions& opts);

struct BranchSettings {
  int ny = 8;
  double ds = 1e-3;
  double s_max = 0.1;
  double tol = 1e-10;
  int max_iter = 10;
};

struct Branch {
  std::vector<PeriodicSolution> points;  // s = ds, 2 ds, ...
  double omega0 = 0.0;
  double lambda = 0.0;
  GridFunction phi;
  bool truncated = false;
  double failed_s = 0.0;
  std::string failure;
  std::vector<double> failure_history;
};

/// Amplitudes k ds, k = 1..floor(s_max / ds); a single point when s_max < ds.
std::vector<double> branch_amplitudes(double ds, double s_max);

/// Continuation in s. The first predictor is s phi in mode 1 at omega0; later
/// ones extrapolate linearly from the last two states (the bifurcation point
/// s = 0 counts as the state before the first). Stops at the first point
/// that fails to converge and records why.
Branch continue_branch(const ModalProblem& problem, const BranchSettings& settings);
Branch continue_branch(const OperatorL& L, const Grid& grid, const BranchSettings& settings);

/// Smoothed residual of the mode equations for a converged state moved to
/// the grid with 2n nodes and 2 Ny harmonics; the profile and L are rebuilt
/// on the finer grid.
class RefinedCheck {
 public:
  RefinedCheck(const SolitonProfile& profile, const LinearMode& mode, int ny);
  double operator()(const PeriodicSolution& state) const;
  const Grid& grid() const { return fine_->grid(); }

 private:
  Grid coarse_;
  std::unique_ptr<ModalProblem> fine_;
};

struct FieldTable {
  Vector x;  // full line: -L .. -h, 0, h .. L
  Vector y;  // one period, both ends included
  // Row-major in (y, x): entry i * x.size() + k.
  Vector psi, psi_y, phi, v;
};

/// psi, psi_y, phi = psi_x and v = phi + Q on the full line over one period.
/// phi is interpolated from the dual nodes onto the primary nodes and x = 0.
FieldTable reconstruct(const PeriodicSolution& state, const SolitonProfile& profile, int y_samples);

}  // namespace chkp
