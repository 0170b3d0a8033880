#include "chkp/error.hpp"
#include "chkp/linalg.hpp"
#include "chkp/operators.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace chkp;

namespace {

const SolitonParams kParams{3.0, 1.0};

const SolitonProfile& profile1024() {
  static const SolitonProfile p = solve_profile(kParams, build_grid(40.0, 1024));
  return p;
}

const SolitonProfile& profile256() {
  static const SolitonProfile p = solve_profile(kParams, build_grid(40.0, 256));
  return p;
}

double asymmetry(const SparseMatrix& a) { return Matrix(a - SparseMatrix(a.transpose())).cwiseAbs().maxCoeff(); }

// Smooth odd test functions with varying width and centre.
Vector odd_test(const Vector& x, int j) {
  Vector v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    v[i] = x[i] * std::exp(-x[i] * x[i] / (2.0 + j)) * (1.0 + 0.1 * j * std::cos(x[i]));
  return v;
}

Vector even_test(const Vector& x, int j) {
  Vector v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    v[i] = std::exp(-x[i] * x[i] / (1.5 + j)) * (1.0 + 0.2 * j * x[i] * x[i]);
  return v;
}

}  // namespace

TEST(AssembleM, ExactlySymmetric) {
  for (Parity p : {Parity::even, Parity::odd}) EXPECT_EQ(asymmetry(assemble_M(profile256(), p).matrix), 0.0);
}

TEST(AssembleM, KernelIsQPrime) {
  const SolitonProfile& prof = profile1024();
  const OperatorM m = assemble_M(prof, Parity::odd);
  const Vector r = m.matrix * prof.primary.Qx;
  EXPECT_LT(l2_norm(prof.grid, r), 1e-6 * l2_norm(prof.grid, prof.primary.Qx));
}

TEST(AssembleM, KernelResidualDecreasesUnderRefinement) {
  double prev = 1e300;
  for (int n : {256, 512, 1024}) {
    const SolitonProfile prof = solve_profile(kParams, build_grid(40.0, n));
    const Vector r = assemble_M(prof, Parity::odd).matrix * prof.primary.Qx;
    const double rel = l2_norm(prof.grid, r) / l2_norm(prof.grid, prof.primary.Qx);
    EXPECT_LT(rel, prev) << n;
    prev = rel;
  }
}

TEST(AssembleM, FreeOperator) {
  const Grid g = build_grid(20.0, 128);
  const SolitonProfile zero = SolitonProfile::zero(kParams, g);
  const OperatorM m = assemble_M(zero, Parity::even);
  const SparseMatrix d2 = diff_operator(g, 2, Parity::even).matrix;
  SparseMatrix id(g.n, g.n);
  id.setIdentity();
  const SparseMatrix expected = -kParams.c * d2 + kParams.crest() * id;
  EXPECT_LT(Matrix(m.matrix - expected).cwiseAbs().maxCoeff(), 1e-10);
  const Vector ev = symmetric_eigen(Matrix(m.matrix), false).values;
  EXPECT_GE(ev[0], kParams.crest() - 1e-12);
}

TEST(AssembleL, ExactlySymmetric) { EXPECT_EQ(asymmetry(assemble_L(profile256()).matrix), 0.0); }

TEST(AssembleL, QuadraticFormIdentity) {
  const SolitonProfile& prof = profile1024();
  const Grid& g = prof.grid;
  const OperatorL l = assemble_L(prof);
  const OperatorM me = assemble_M(prof, Parity::even);
  const SparseMatrix d = diff_operator(g, 1, Parity::odd).matrix;
  for (int j = 0; j < 5; ++j) {
    const Vector psi = odd_test(g.nodes(), j);
    const double lhs = l2_inner(g, l.matrix * psi, psi);
    const Vector dpsi = d * psi;
    const double rhs = l2_inner(g, me.matrix * dpsi, dpsi);
    EXPECT_NEAR(lhs, rhs, 1e-8 * std::abs(rhs)) << j;
  }
}

TEST(AssembleL, ExpandedFormAgrees) {
  const SolitonProfile& prof = profile1024();
  const Grid& g = prof.grid;
  const OperatorL a = assemble_L(prof);
  const OperatorL b = assemble_L_expanded(prof);
  for (int j = 0; j < 5; ++j) {
    const Vector psi = odd_test(g.nodes(), j);
    const Vector la = a.matrix * psi;
    EXPECT_LT(l2_norm(g, la - b.matrix * psi), 1e-8 * l2_norm(g, la)) << j;
  }
}

TEST(AssembleL, FreeOperatorNonnegative) {
  const Grid g = build_grid(20.0, 128);
  const OperatorL l = assemble_L(SolitonProfile::zero(kParams, g));
  const SparseMatrix d2 = diff_operator(g, 2, Parity::odd).matrix;
  const SparseMatrix d4 = diff_operator(g, 4, Parity::odd).matrix;
  const SparseMatrix expected = kParams.c * d4 - kParams.crest() * d2;
  EXPECT_LT(Matrix(l.matrix - expected).cwiseAbs().maxCoeff(), 1e-8 * Matrix(d4).cwiseAbs().maxCoeff());
  EXPECT_GE(symmetric_eigen(Matrix(l.matrix), false).values[0], 0.0);
}

TEST(Liouville, OriginAndMonotone) {
  const LiouvilleMap map(profile256());
  EXPECT_EQ(map.z_of_x(0.0), 0.0);
  for (Stagger s : {Stagger::primary, Stagger::dual}) {
    const Vector& z = map.z_nodes(s);
    EXPECT_GT(z[0], 0.0);
    for (Eigen::Index i = 1; i < z.size(); ++i) EXPECT_GT(z[i], z[i - 1]);
  }
}

TEST(Liouville, MatchesQuadrature) {
  const LiouvilleMap map(profile256());
  const SolitonCurve curve(kParams);
  for (double x : {0.05, 0.5, 2.0, 7.0, 20.0, 39.0}) {
    auto f = [&](double t) { return 1.0 / std::sqrt(kParams.c - curve.value(t)); };
    const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, x, 15, 1e-14);
    EXPECT_NEAR(map.z_of_x(x), ref, 1e-11 * std::max(1.0, ref)) << x;
    EXPECT_NEAR(map.x_of_z(map.z_of_x(x)), x, 1e-10 * std::max(1.0, x));
  }
}

TEST(Liouville, TailSlope) {
  const LiouvilleMap map(profile256());
  const double slope = (map.z_of_x(38.0) - map.z_of_x(30.0)) / 8.0;
  EXPECT_NEAR(slope, 1.0 / std::sqrt(kParams.c), 1e-8);
}

TEST(Liouville, RoundTrip) {
  const SolitonProfile& prof = profile1024();
  const LiouvilleMap map(prof);
  const Grid zg = liouville_grid(map);
  for (Parity p : {Parity::even, Parity::odd}) {
    for (int j = 0; j < 3; ++j) {
      const Vector x = prof.grid.points(p);
      const Vector psi = p == Parity::even ? even_test(x, j) : odd_test(x, j);
      const Vector back = map.to_x(map.to_z(psi, p, zg), p, zg);
      EXPECT_LT((back - psi).cwiseAbs().maxCoeff(), 1e-8) << to_string(p) << j;
    }
  }
}

TEST(AssembleK, SymmetricWithDecayingPotential) {
  const LiouvilleMap map(profile1024());
  const Grid zg = liouville_grid(map);
  const OperatorK k = assemble_K(map, zg, Parity::even);
  EXPECT_EQ(asymmetry(k.matrix), 0.0);
  EXPECT_LE(std::abs(k.potential[zg.n - 1]), 1e-6 * std::abs(k.potential[0]));
  EXPECT_NEAR(k.potential[zg.n - 1] + k.band_edge, kParams.crest(), 1e-6);
}

TEST(AssembleK, ConjugacyWithM) {
  const SolitonProfile& prof = profile1024();
  const LiouvilleMap map(prof);
  const Grid zg = liouville_grid(map);
  const OperatorM m = assemble_M(prof, Parity::even);
  const OperatorK k = assemble_K(map, zg, Parity::even);
  const int interior = prof.grid.n - 4 * closure_layer(prof.grid);
  for (int j = 0; j < 5; ++j) {
    const Vector psi = even_test(prof.grid.dual_nodes(), j);
    const Vector mpsi = m.matrix * psi;
    const Vector kg = map.to_x(k.matrix * map.to_z(psi, Parity::even, zg), Parity::even, zg);
    const double err = (mpsi - kg).head(interior).norm() / mpsi.head(interior).norm();
    EXPECT_LT(err, 1e-4) << j;
  }
}

TEST(AssembleK, FreeOperator) {
  const Grid g = build_grid(20.0, 128);
  const LiouvilleMap map(SolitonProfile::zero(kParams, g));
  const Grid zg = liouville_grid(map);
  const OperatorK k = assemble_K(map, zg, Parity::even);
  EXPECT_EQ(k.potential.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GE(symmetric_eigen(Matrix(k.matrix), false).values[0], kParams.crest() - 1e-12);
}

TEST(Nonlinearity, ZeroAndHomogeneity) {
  const Grid g = build_grid(20.0, 256);
  EXPECT_EQ(apply_N(g, {Parity::odd, Vector::Zero(g.n)}).values.cwiseAbs().maxCoeff(), 0.0);
  const Vector psi = odd_test(g.nodes(), 2);
  const Vector n1 = apply_N(g, {Parity::odd, psi}).values;
  // Scaling by a power of two is exact in floating point.
  EXPECT_EQ((apply_N(g, {Parity::odd, 2.0 * psi}).values - 4.0 * n1).cwiseAbs().maxCoeff(), 0.0);
  const double t = 0.37;
  EXPECT_LT((apply_N(g, {Parity::odd, t * psi}).values - t * t * n1).norm(), 1e-10 * n1.norm());
}

TEST(Nonlinearity, ParityContract) {
  const Grid g = build_grid(20.0, 64);
  const GridFunction out = apply_N(g, {Parity::odd, odd_test(g.nodes(), 0)});
  EXPECT_EQ(out.parity, Parity::odd);
  EXPECT_THROW(apply_N(g, {Parity::even, Vector::Ones(g.n)}), ParityError);
  EXPECT_THROW(apply_N(g, {Parity::odd, Vector::Ones(g.n + 1)}), ParityError);
}

TEST(Nonlinearity, MatchesContinuumFormula) {
  // psi = x exp(-x^2): N = 2 psi'' psi''' + psi' psi'''' - 3 psi' psi''.
  auto e = [](double x) { return std::exp(-x * x); };
  auto d1 = [&](double x) { return (1 - 2 * x * x) * e(x); };
  auto d2 = [&](double x) { return (4 * x * x * x - 6 * x) * e(x); };
  auto d3 = [&](double x) { return (-8 * x * x * x * x + 24 * x * x - 6) * e(x); };
  auto d4 = [&](double x) { return (16 * std::pow(x, 5) - 80 * x * x * x + 60 * x) * e(x); };
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const Grid g = build_grid(10.0, 256 << r);
    const Vector x = g.nodes();
    Vector psi(g.n), ref(g.n);
    for (int k = 0; k < g.n; ++k) {
      psi[k] = x[k] * e(x[k]);
      ref[k] = 2 * d2(x[k]) * d3(x[k]) + d1(x[k]) * d4(x[k]) - 3 * d1(x[k]) * d2(x[k]);
    }
    err[r] = (apply_N(g, {Parity::odd, psi}).values - ref).cwiseAbs().maxCoeff();
  }
  EXPECT_LT(err[1], 1e-6);
  EXPECT_GT(std::log2(err[0] / err[1]), 5.0);
}

TEST(Nonlinearity, LinearizationMatchesFiniteDifference) {
  const Grid g = build_grid(20.0, 512);
  const OddCalculus ops(g);
  for (int j = 0; j < 4; ++j) {
    const Vector psi = 0.3 * odd_test(g.nodes(), j);
    const Vector h = odd_test(g.nodes(), j + 1);
    const Vector analytic = linearize_N(ops, psi) * h;
    const double eps = 1e-4;
    const Vector fd = (apply_N(ops, psi + eps * h) - apply_N(ops, psi - eps * h)) / (2 * eps);
    EXPECT_LT((analytic - fd).norm(), 1e-6 * analytic.norm()) << j;
  }
}

TEST(BlockOperator, StructureAndReversibility) {
  const SolitonProfile& prof = profile256();
  const BlockOperator b(prof.grid, assemble_L(prof));
  const SparseMatrix a = b.sparse();
  const SparseMatrix s = b.reverser();
  EXPECT_EQ(Matrix(s * a + a * s).cwiseAbs().maxCoeff(), 0.0);

  const Vector psi = odd_test(prof.grid.nodes(), 1);
  const Vector zero = Vector::Zero(prof.grid.n);
  const BlockState lw = b.apply({zero, psi});
  EXPECT_EQ((lw.w1 - b.L().matrix * psi).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(lw.w2.cwiseAbs().maxCoeff(), 0.0);
  const BlockState iw = b.apply({psi, zero});
  EXPECT_EQ(iw.w1.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((iw.w2 - psi).cwiseAbs().maxCoeff(), 0.0);

  for (int j = 0; j < 10; ++j) {
    const BlockState w{odd_test(prof.grid.nodes(), j), 0.1 * odd_test(prof.grid.nodes(), j + 3)};
    const BlockState lhs = b.nonlinearity(BlockOperator::reverse(w));
    const BlockState rhs = BlockOperator::reverse(b.nonlinearity(w));
    EXPECT_LE((lhs.w1 + rhs.w1).norm() + (lhs.w2 + rhs.w2).norm(), 1e-12);
    const BlockState sl = BlockOperator::reverse(b.apply(w));
    const BlockState ls = b.apply(BlockOperator::reverse(w));
    EXPECT_EQ((sl.w1 + ls.w1).cwiseAbs().maxCoeff() + (sl.w2 + ls.w2).cwiseAbs().maxCoeff(), 0.0);
  }
}
