#pragma once

// Half-line discretization of parity-restricted functions on the real line.
//
// A function with known parity is stored only on x > 0. Odd functions live on
// the primary nodes x_k = k h (k = 1..n); their value at the origin is zero by
// construction. Even functions live on the dual nodes x_k = (k - 1/2) h, so no
// value at the origin is ever needed. First derivatives are staggered stencils
// mapping one family of nodes onto the other, which flips parity. Beyond
// x = half_length even samples are zero and odd samples repeat the last
// stored value, so odd functions may level off while their derivatives decay.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <span>
#include <string_view>

namespace chkp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Parity { odd, even };

constexpr Parity flip(Parity p) noexcept { return p == Parity::odd ? Parity::even : Parity::odd; }
constexpr double reflection_sign(Parity p) noexcept { return p == Parity::odd ? -1.0 : 1.0; }
std::string_view to_string(Parity p);

enum class Stagger { primary, dual };

constexpr Stagger stagger_of(Parity p) noexcept {
  return p == Parity::odd ? Stagger::primary : Stagger::dual;
}
constexpr Stagger other(Stagger s) noexcept {
  return s == Stagger::primary ? Stagger::dual : Stagger::primary;
}

/// Uniform-grid stencil families, named by accuracy order.
enum class NodeFamily { fd2, fd4, fd6, fd8 };

int accuracy_order(NodeFamily family);
std::string_view to_string(NodeFamily family);
NodeFamily parse_family(std::string_view name);

struct Grid {
  double half_length = 0.0;
  int n = 0;
  double h = 0.0;
  NodeFamily family = NodeFamily::fd6;

  Vector nodes() const;       // k h, k = 1..n
  Vector dual_nodes() const;  // (k - 1/2) h, k = 1..n
  Vector points(Stagger s) const { return s == Stagger::primary ? nodes() : dual_nodes(); }
  Vector points(Parity p) const { return points(stagger_of(p)); }

  int order() const { return accuracy_order(family); }
  /// Quadrature weight of every stored sample, doubled for the mirror half.
  double weight() const { return 2.0 * h; }
};

Grid build_grid(double half_length, int n, NodeFamily family = NodeFamily::fd6);

/// Samples of a function of known parity, stored on the nodes that parity uses.
struct GridFunction {
  Parity parity = Parity::odd;
  Vector values;
};

struct DiffOperator {
  int order = 1;
  Parity parity_in = Parity::odd;
  SparseMatrix matrix;

  Parity parity_out() const { return order % 2 == 1 ? flip(parity_in) : parity_in; }
  GridFunction operator()(const GridFunction& f) const;
};

/// Derivative of order 1..4 for input of the given parity. Higher orders are
/// compositions of the first-order staggered stencils, so D1 D1 == D2 exactly.
DiffOperator diff_operator(const Grid& grid, int order, Parity parity_in);

/// Samples of a function with the given parity moved from stagger `from` to
/// the other stagger by symmetric Lagrange interpolation.
SparseMatrix stagger_interpolation(const Grid& grid, Stagger from, Parity parity);

/// Local Lagrange interpolation of samples stored on `at` to arbitrary points
/// in [0, half_length]. `stencil` points are used (default: the grid order).
Vector interpolate(const Grid& grid, const Vector& values, Stagger at, Parity parity,
                   std::span<const double> targets, int stencil = 0);

double l2_inner(const Grid& grid, const Vector& a, const Vector& b);
double l2_norm(const Grid& grid, const Vector& a);

/// (sum_{j<=k} ||D^j f||^2)^{1/2} with the discrete full-line L2 norm; k in {0, 2, 4}.
double sobolev_norm(const Grid& grid, const GridFunction& f, int k);

/// Gram matrix G with sobolev_norm(f, k)^2 == weight * f^T G f; any k in 0..4.
SparseMatrix sobolev_gram(const Grid& grid, int k, Parity parity);

/// Finite-difference weights (Fornberg): column d holds the weights of the
/// d-th derivative at `at` from samples at `points`.
Matrix fornberg_weights(double at, std::span<const double> points, int max_derivative);

}  // namespace chkp
