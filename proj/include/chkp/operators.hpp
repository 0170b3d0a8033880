#pragma once

// Linearized operators around the solitary wave Q:
//   M = d_x (Q - c) d_x + Q'' - 3Q + c - 2 kappa      (self-adjoint, both parities)
//   L = -d_x M d_x                                   (odd functions)
//   K = -d_zz + q(z) + c - 2 kappa                   (Liouville form of M)
// and the first-order system W_y = A W + F(W) with W = (psi_y, psi),
//   A = [[0, L], [I, 0]],   F(W) = (-N(W2), 0),   S (W1, W2) = (-W1, W2).

#include "chkp/soliton.hpp"

#include <string>

namespace chkp {

struct OperatorM {
  Parity parity = Parity::even;
  SparseMatrix matrix;  // symmetric, acts on samples stored for `parity`
};

struct OperatorL {
  SparseMatrix matrix;  // symmetric, odd functions
  // Factors of matrix = d^T m d when assembled from M. The product has
  // entries ~ h^-4 whose rounding shifts smooth eigenvalues by ~ eps ||L||;
  // applied factor by factor, the rounding only meets derivatives.
  SparseMatrix d, m;

  Vector apply(const Vector& x) const;
};

/// Divergence-form M: D^T diag(c - Q) D + diag(Q'' - 3Q + c - 2 kappa), with D the
/// first derivative leaving `parity`. Exactly symmetric.
OperatorM assemble_M(const SolitonProfile& profile, Parity parity);

/// L = D_oe^T M_even D_oe; exactly symmetric and <L psi, psi> = <M D psi, D psi>.
OperatorL assemble_L(const SolitonProfile& profile);

/// The same L from the expanded fourth-order form
///   D2 diag(c - Q) D2 - (c - 2 kappa) D2 - D_eo diag(Q'' - 3Q) D_oe.
OperatorL assemble_L_expanded(const SolitonProfile& profile);

/// Liouville change of variables z(x) = int_0^x (c - Q)^{-1/2}. For the CH
/// solitary wave Q(z) = a sech^2(sqrt(a) z / 2) with a = c - 2 kappa, so z(x)
/// and x(z) are available in closed form.
class LiouvilleMap {
 public:
  explicit LiouvilleMap(const SolitonProfile& profile);

  double z_of_x(double x) const;
  double x_of_z(double z) const;
  double Q_of_z(double z) const;
  /// z at the far end of the x domain.
  double z_max() const { return z_max_; }

  /// z at the stored nodes of each stagger.
  const Vector& z_nodes(Stagger s) const { return s == Stagger::primary ? z_primary_ : z_dual_; }
  /// (c - Q)^{1/4} at the stored x nodes of each stagger.
  const Vector& weight(Stagger s) const { return s == Stagger::primary ? w_primary_ : w_dual_; }

  const SolitonProfile& profile() const { return profile_; }

  /// Gamma(z) = (c - Q)^{1/4} psi(x(z)) sampled on z_grid.
  Vector to_z(const Vector& psi, Parity parity, const Grid& z_grid) const;
  /// psi(x) = (c - Q)^{-1/4} Gamma(z(x)) sampled on the profile grid.
  Vector to_x(const Vector& gamma, Parity parity, const Grid& z_grid) const;

 private:
  SolitonProfile profile_;
  double a_ = 0.0, c_ = 0.0, z_max_ = 0.0;
  bool flat_ = false;  // Q == 0: z = x / sqrt(c)
  Vector z_primary_, z_dual_, w_primary_, w_dual_;
};

/// Uniform z grid over [0, z_max] with the profile's node count and family.
Grid liouville_grid(const LiouvilleMap& map);

struct OperatorK {
  Parity parity = Parity::even;
  SparseMatrix matrix;  // symmetric
  Vector potential;     // q(z) at the stored z nodes
  double band_edge = 0.0;  // c - 2 kappa
};

/// K = D^T D + diag(q + c - 2 kappa) on z_grid, with
/// q = (3/4) Q'' - 3 Q - (1/16) Q'^2 / (c - Q).
OperatorK assemble_K(const LiouvilleMap& map, const Grid& z_grid, Parity parity);

/// Derivatives of odd functions and the odd primary-to-dual interpolation,
/// precomputed for repeated evaluation of N.
struct OddCalculus {
  explicit OddCalculus(const Grid& grid);
  SparseMatrix d1, d2, d3;  // odd input
  SparseMatrix d_eo;        // first derivative of even (dual) samples
  SparseMatrix to_dual;     // odd primary samples -> dual nodes
};

/// N(psi) = ((1/2) psi_xx^2 + psi_x psi_xxx - (3/2) psi_x^2)_x for odd psi.
/// psi_xx is odd and lives on primary nodes; it is moved to the dual nodes
/// before squaring so that all products are even dual-node functions.
GridFunction apply_N(const Grid& grid, const GridFunction& psi);
Vector apply_N(const OddCalculus& ops, const Vector& psi);

/// Derivative of N at psi: h -> (psi_xx h_xx + psi_x h_xxx + (psi_xxx - 3 psi_x) h_x)_x.
SparseMatrix linearize_N(const OddCalculus& ops, const Vector& psi);

struct BlockState {
  Vector w1, w2;
};

class BlockOperator {
 public:
  BlockOperator(const Grid& grid, OperatorL L);

  const Grid& grid() const { return grid_; }
  const OperatorL& L() const { return L_; }
  int size() const { return grid_.n; }

  BlockState apply(const BlockState& w) const;
  BlockState nonlinearity(const BlockState& w) const;
  static BlockState reverse(const BlockState& w);

  /// [[0, L], [I, 0]] as a 2n x 2n matrix.
  SparseMatrix sparse() const;
  /// [[-I, 0], [0, I]].
  SparseMatrix reverser() const;

 private:
  Grid grid_;
  OperatorL L_;
  OddCalculus calc_;
};

struct OperatorBundle {
  OperatorM M_even, M_odd;
  OperatorL L;
};

OperatorBundle assemble_all(const SolitonProfile& profile);

/// Writes `stem`.bin (row-major float64) and `stem`.json (shape, provenance).
void dump_operator(const SparseMatrix& a, const std::string& stem, const std::string& name,
                   const SolitonProfile& profile);

}  // namespace chkp
