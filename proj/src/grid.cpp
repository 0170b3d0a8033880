#include "chkp/grid.hpp"

#include "chkp/error.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace chkp {

std::string_view to_string(Parity p) { return p == Parity::odd ? "odd" : "even"; }

int accuracy_order(NodeFamily family) {
  switch (family) {
    case NodeFamily::fd2: return 2;
    case NodeFamily::fd4: return 4;
    case NodeFamily::fd6: return 6;
    case NodeFamily::fd8: return 8;
  }
  return 6;
}

std::string_view to_string(NodeFamily family) {
  switch (family) {
    case NodeFamily::fd2: return "fd2";
    case NodeFamily::fd4: return "fd4";
    case NodeFamily::fd6: return "fd6";
    case NodeFamily::fd8: return "fd8";
  }
  return "fd6";
}

NodeFamily parse_family(std::string_view name) {
  if (name == "fd2") return NodeFamily::fd2;
  if (name == "fd4") return NodeFamily::fd4;
  if (name == "fd6") return NodeFamily::fd6;
  if (name == "fd8") return NodeFamily::fd8;
  throw ParameterError("unknown node family '" + std::string(name) + "' (expected fd2, fd4, fd6 or fd8)");
}

Vector Grid::nodes() const {
  Vector x(n);
  for (int k = 0; k < n; ++k) x[k] = (k + 1) * h;
  return x;
}

Vector Grid::dual_nodes() const {
  Vector x(n);
  for (int k = 0; k < n; ++k) x[k] = (k + 0.5) * h;
  return x;
}

Grid build_grid(double half_length, int n, NodeFamily family) {
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw ParameterError("grid half length must be positive, got " + std::to_string(half_length));
  if (n < 8) throw ParameterError("grid needs n >= 8 nodes, got " + std::to_string(n));
  Grid g;
  g.half_length = half_length;
  g.n = n;
  g.h = half_length / n;
  g.family = family;
  return g;
}

Matrix fornberg_weights(double at, std::span<const double> points, int max_derivative) {
  const int np = static_cast<int>(points.size());
  Matrix c = Matrix::Zero(np, max_derivative + 1);
  double c1 = 1.0;
  double c4 = points[0] - at;
  c(0, 0) = 1.0;
  for (int i = 1; i < np; ++i) {
    const int mn = std::min(i, max_derivative);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = points[i] - at;
    for (int j = 0; j < i; ++j) {
      const double c3 = points[i] - points[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Adds `weight * f(sample index)` to row `row`, resolving indices that fall
// outside 1..n through parity reflection or the far-field closure. Indices are
// 1-based positions on the given stagger: primary index k sits at k h, dual
// index j at (j - 1/2) h. Beyond the last node even (dual) samples are zero
// and odd (primary) samples repeat the last value: an odd function may level
// off to a constant while its derivative decays.
void add_sample(Triplets& t, int row, Stagger s, Parity parity, int index, double weight, int n) {
  double sign = 1.0;
  if (s == Stagger::primary) {
    if (index == 0) {
      if (parity == Parity::odd) return;
      throw ParityError("even function sampled at the origin on primary nodes");
    }
    if (index < 0) {
      index = -index;
      sign = reflection_sign(parity);
    }
  } else if (index <= 0) {
    index = 1 - index;
    sign = reflection_sign(parity);
  }
  if (index > n) {
    if (s == Stagger::dual) return;
    index = n;
  }
  t.emplace_back(row, index - 1, sign * weight);
}

// Stencil mapping samples on stagger `from` to the other stagger, for
// derivative order 0 (interpolation) or 1.
SparseMatrix stagger_stencil(const Grid& g, Stagger from, Parity parity, int derivative) {
  const int p = g.order();
  // Offsets (in units of h) from the target to the source samples.
  std::vector<double> offsets(p);
  for (int i = 0; i < p; ++i) offsets[i] = -p / 2 + 0.5 + i;
  const Matrix w = fornberg_weights(0.0, offsets, derivative);
  const double scale = derivative == 1 ? 1.0 / g.h : 1.0;

  Triplets t;
  t.reserve(static_cast<std::size_t>(g.n) * p);
  for (int r = 1; r <= g.n; ++r) {
    for (int i = 0; i < p; ++i) {
      // Target at r h (primary) or (r - 1/2) h (dual); source index follows.
      const int idx = from == Stagger::primary ? static_cast<int>(std::lround(r - 0.5 + offsets[i]))
                                               : static_cast<int>(std::lround(r + 0.5 + offsets[i]));
      add_sample(t, r - 1, from, parity, idx, scale * w(i, derivative), g.n);
    }
  }
  SparseMatrix m(g.n, g.n);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  return m;
}

// First derivative for the given input parity. The even-input operator is
// assembled as the negative transpose of the odd-input one, which it equals
// up to rounding; doing so makes the skew-adjointness exact.
SparseMatrix first_derivative(const Grid& g, Parity parity_in) {
  const SparseMatrix d_oe = stagger_stencil(g, Stagger::primary, Parity::odd, 1);
  if (parity_in == Parity::odd) return d_oe;
  return SparseMatrix(-SparseMatrix(d_oe.transpose()));
}

}  // namespace

GridFunction DiffOperator::operator()(const GridFunction& f) const {
  if (f.parity != parity_in)
    throw ParityError("DiffOperator expects " + std::string(to_string(parity_in)) + " input, got " +
                      std::string(to_string(f.parity)));
  return {parity_out(), matrix * f.values};
}

DiffOperator diff_operator(const Grid& grid, int order, Parity parity_in) {
  if (order < 1 || order > 4) throw ParameterError("derivative order must be 1..4, got " + std::to_string(order));
  DiffOperator op;
  op.order = order;
  op.parity_in = parity_in;
  Parity p = parity_in;
  op.matrix = first_derivative(grid, p);
  for (int k = 1; k < order; ++k) {
    p = flip(p);
    op.matrix = (first_derivative(grid, p) * op.matrix).pruned();
  }
  return op;
}

SparseMatrix stagger_interpolation(const Grid& grid, Stagger from, Parity parity) {
  return stagger_stencil(grid, from, parity, 0);
}

Vector interpolate(const Grid& grid, const Vector& values, Stagger at, Parity parity,
                   std::span<const double> targets, int stencil) {
  const int m = stencil > 0 ? stencil : grid.order();
  const double shift = at == Stagger::primary ? 0.0 : 0.5;
  const double slack = 1e-12 * grid.half_length;
  Vector out(static_cast<Eigen::Index>(targets.size()));
  std::vector<double> pos(m);
  Triplets row;
  for (std::size_t q = 0; q < targets.size(); ++q) {
    const double x = targets[q];
    if (!(x >= -slack && x <= grid.half_length + slack))
      throw ParameterError("interpolation target " + std::to_string(x) + " outside [0, " +
                           std::to_string(grid.half_length) + "]");
    const int left = static_cast<int>(std::floor(x / grid.h + shift));
    const int first = left - m / 2 + 1;
    for (int i = 0; i < m; ++i) pos[i] = (first + i - shift) * grid.h;
    const Matrix w = fornberg_weights(x, pos, 0);
    row.clear();
    for (int i = 0; i < m; ++i) add_sample(row, 0, at, parity, first + i, w(i, 0), grid.n);
    double v = 0.0;
    for (const auto& e : row) v += e.value() * values[e.col()];
    out[static_cast<Eigen::Index>(q)] = v;
  }
  return out;
}

double l2_inner(const Grid& grid, const Vector& a, const Vector& b) { return grid.weight() * a.dot(b); }

double l2_norm(const Grid& grid, const Vector& a) { return std::sqrt(l2_inner(grid, a, a)); }

double sobolev_norm(const Grid& grid, const GridFunction& f, int k) {
  if (k != 0 && k != 2 && k != 4)
    throw ParameterError("sobolev_norm supports k in {0, 2, 4}, got " + std::to_string(k));
  double sum = grid.weight() * f.values.squaredNorm();
  for (int j = 1; j <= k; ++j) {
    const DiffOperator d = diff_operator(grid, j, f.parity);
    sum += grid.weight() * (d.matrix * f.values).squaredNorm();
  }
  return std::sqrt(sum);
}

SparseMatrix sobolev_gram(const Grid& grid, int k, Parity parity) {
  if (k < 0 || k > 4) throw ParameterError("sobolev_gram supports k in 0..4, got " + std::to_string(k));
  SparseMatrix g(grid.n, grid.n);
  g.setIdentity();
  for (int j = 1; j <= k; ++j) {
    const DiffOperator d = diff_operator(grid, j, parity);
    g += SparseMatrix(d.matrix.transpose()) * d.matrix;
  }
  return g;
}

}  // namespace chkp
