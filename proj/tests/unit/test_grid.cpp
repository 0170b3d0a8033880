#include "chkp/error.hpp"
#include "chkp/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace chkp;

namespace {

Vector sample(const Vector& x, double (*f)(double)) {
  Vector v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) v[i] = f(x[i]);
  return v;
}

double gauss(double x) { return std::exp(-x * x); }
double gauss_d1(double x) { return -2.0 * x * std::exp(-x * x); }
double gauss_d2(double x) { return (4.0 * x * x - 2.0) * std::exp(-x * x); }
double odd_bump(double x) { return x * std::exp(-x * x); }
double odd_bump_d4(double x) {
  // d^4/dx^4 of x e^{-x^2}
  return (16.0 * x * x * x * x * x - 80.0 * x * x * x + 60.0 * x) * std::exp(-x * x);
}

double max_interior_error(const Vector& a, const Vector& b, int skip) {
  return (a - b).head(a.size() - skip).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(BuildGrid, SpacingIsExact) {
  const Grid g = build_grid(40.0, 1024);
  EXPECT_EQ(g.h, 40.0 / 1024);
  EXPECT_EQ(g.n, 1024);
  EXPECT_EQ(g.family, NodeFamily::fd6);
}

TEST(BuildGrid, SmallGridNodes) {
  const Grid g = build_grid(1.0, 8);
  const Vector x = g.nodes();
  ASSERT_EQ(x.size(), 8);
  for (int k = 0; k < 8; ++k) EXPECT_DOUBLE_EQ(x[k], (k + 1) / 8.0);
  EXPECT_DOUBLE_EQ(x[7], 1.0);
  const Vector xd = g.dual_nodes();
  for (int k = 1; k < 8; ++k) EXPECT_GT(xd[k], xd[k - 1]);
  EXPECT_GT(xd[0], 0.0);
}

TEST(BuildGrid, RejectsBadParameters) {
  EXPECT_THROW(build_grid(-1.0, 16), ParameterError);
  EXPECT_THROW(build_grid(0.0, 16), ParameterError);
  EXPECT_THROW(build_grid(1.0, 7), ParameterError);
  EXPECT_THROW(parse_family("spectral"), ParameterError);
  EXPECT_EQ(parse_family("fd4"), NodeFamily::fd4);
}

TEST(Fornberg, CentralDifferenceWeights) {
  const double pts[] = {-1.0, 0.0, 1.0};
  const Matrix w = fornberg_weights(0.0, pts, 2);
  EXPECT_NEAR(w(0, 1), -0.5, 1e-15);
  EXPECT_NEAR(w(1, 1), 0.0, 1e-15);
  EXPECT_NEAR(w(2, 1), 0.5, 1e-15);
  EXPECT_NEAR(w(0, 2), 1.0, 1e-15);
  EXPECT_NEAR(w(1, 2), -2.0, 1e-15);
  EXPECT_NEAR(w(2, 2), 1.0, 1e-15);
  EXPECT_NEAR(w(1, 0), 1.0, 1e-15);
}

TEST(Fornberg, StaggeredFourthOrder) {
  const double pts[] = {-1.5, -0.5, 0.5, 1.5};
  const Matrix w = fornberg_weights(0.0, pts, 1);
  EXPECT_NEAR(w(0, 1), 1.0 / 24.0, 1e-15);
  EXPECT_NEAR(w(1, 1), -9.0 / 8.0, 1e-15);
  EXPECT_NEAR(w(2, 1), 9.0 / 8.0, 1e-15);
  EXPECT_NEAR(w(3, 1), -1.0 / 24.0, 1e-15);
}

TEST(DiffOperator, DerivativeOfConstantVanishes) {
  const Grid g = build_grid(10.0, 64);
  const DiffOperator d1 = diff_operator(g, 1, Parity::even);
  const Vector r = d1.matrix * Vector::Ones(g.n);
  // Rows whose stencil reaches past x = L see the decay closure, not the constant.
  const int closure = g.order() / 2;
  EXPECT_LT(r.head(g.n - closure).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DiffOperator, ParityBookkeeping) {
  const Grid g = build_grid(5.0, 32);
  for (int order = 1; order <= 4; ++order) {
    const DiffOperator d = diff_operator(g, order, Parity::odd);
    EXPECT_EQ(d.parity_out(), order % 2 ? Parity::even : Parity::odd);
  }
  const DiffOperator d1 = diff_operator(g, 1, Parity::odd);
  const GridFunction f{Parity::odd, Vector::Ones(g.n)};
  EXPECT_EQ(d1(f).parity, Parity::even);
  EXPECT_THROW(d1(GridFunction{Parity::even, Vector::Ones(g.n)}), ParityError);
  EXPECT_THROW(diff_operator(g, 5, Parity::odd), ParameterError);
  EXPECT_THROW(diff_operator(g, 0, Parity::odd), ParameterError);
}

TEST(DiffOperator, StaggeredPairIsSkewAdjoint) {
  for (NodeFamily fam : {NodeFamily::fd2, NodeFamily::fd4, NodeFamily::fd6, NodeFamily::fd8}) {
    const Grid g = build_grid(7.0, 40, fam);
    const Matrix doe = Matrix(diff_operator(g, 1, Parity::odd).matrix);
    const Matrix deo = Matrix(diff_operator(g, 1, Parity::even).matrix);
    EXPECT_EQ((deo + doe.transpose()).cwiseAbs().maxCoeff(), 0.0) << to_string(fam);
  }
}

TEST(DiffOperator, CompositionIsExact) {
  const Grid g = build_grid(7.0, 40);
  const SparseMatrix d1o = diff_operator(g, 1, Parity::odd).matrix;
  const SparseMatrix d1e = diff_operator(g, 1, Parity::even).matrix;
  const SparseMatrix d2 = diff_operator(g, 2, Parity::odd).matrix;
  EXPECT_LT(Matrix(d1e * d1o - d2).cwiseAbs().maxCoeff(), 1e-12 / (g.h * g.h));
}

TEST(DiffOperator, SineDerivativeConverges) {
  // sin(pi x / (2L)) is odd; compare on the interior, away from the closure.
  const double L = 4.0;
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const Grid g = build_grid(L, 64 << r, NodeFamily::fd4);
    const Vector x = g.nodes();
    const Vector xd = g.dual_nodes();
    Vector f(g.n), df(g.n);
    const double w = std::numbers::pi / (2.0 * L);
    for (int k = 0; k < g.n; ++k) {
      f[k] = std::sin(w * x[k]);
      df[k] = w * std::cos(w * xd[k]);
    }
    const Vector d = diff_operator(g, 1, Parity::odd).matrix * f;
    const int keep = g.n / 2;
    err[r] = (d - df).head(keep).cwiseAbs().maxCoeff();
  }
  EXPECT_LT(err[1], err[0]);
  EXPECT_GT(std::log2(err[0] / err[1]), 3.5);
}

class RefinementOrder : public ::testing::TestWithParam<NodeFamily> {};

TEST_P(RefinementOrder, SecondDerivativeOfGaussian) {
  const NodeFamily fam = GetParam();
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const Grid g = build_grid(8.0, 64 << r, fam);
    const Vector xd = g.dual_nodes();
    const Vector d2 = diff_operator(g, 2, Parity::even).matrix * sample(xd, gauss);
    err[r] = max_interior_error(d2, sample(xd, gauss_d2), 0);
  }
  const double observed = std::log2(err[0] / err[1]);
  EXPECT_NEAR(observed, accuracy_order(fam), 0.3) << to_string(fam);
}

TEST_P(RefinementOrder, FourthDerivativeOfOddBump) {
  const NodeFamily fam = GetParam();
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const Grid g = build_grid(8.0, 64 << r, fam);
    const Vector x = g.nodes();
    const Vector d4 = diff_operator(g, 4, Parity::odd).matrix * sample(x, odd_bump);
    err[r] = max_interior_error(d4, sample(x, odd_bump_d4), 0);
  }
  EXPECT_NEAR(std::log2(err[0] / err[1]), accuracy_order(fam), 0.4) << to_string(fam);
}

INSTANTIATE_TEST_SUITE_P(Families, RefinementOrder,
                         ::testing::Values(NodeFamily::fd2, NodeFamily::fd4, NodeFamily::fd6, NodeFamily::fd8));

TEST(DiffOperator, FirstDerivativeTwiceMatchesSecond) {
  const Grid g = build_grid(8.0, 256);
  const Vector xd = g.dual_nodes();
  const Vector f = sample(xd, gauss);
  const SparseMatrix d1e = diff_operator(g, 1, Parity::even).matrix;
  const SparseMatrix d1o = diff_operator(g, 1, Parity::odd).matrix;
  const Vector x = g.nodes();
  EXPECT_LT((d1e * f - sample(x, gauss_d1)).cwiseAbs().maxCoeff(), 1e-8);
  const Vector twice = d1o * (d1e * f);
  const Vector once = diff_operator(g, 2, Parity::even).matrix * f;
  EXPECT_LT(l2_norm(g, twice - once), 1e-12);
}

TEST(Interpolation, StaggerRoundTrip) {
  const Grid g = build_grid(8.0, 256);
  const Vector x = g.nodes();
  const Vector xd = g.dual_nodes();
  const SparseMatrix to_dual = stagger_interpolation(g, Stagger::primary, Parity::odd);
  const Vector fd = to_dual * sample(x, odd_bump);
  EXPECT_LT((fd - sample(xd, odd_bump)).cwiseAbs().maxCoeff(), 1e-9);
  const SparseMatrix to_primary = stagger_interpolation(g, Stagger::dual, Parity::even);
  EXPECT_LT((to_primary * sample(xd, gauss) - sample(x, gauss)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Interpolation, ArbitraryTargets) {
  const Grid g = build_grid(8.0, 256);
  const Vector xd = g.dual_nodes();
  const std::vector<double> t = {0.0, 0.01, 0.3337, 1.0, 2.71828, 7.9};
  const Vector v = interpolate(g, sample(xd, gauss), Stagger::dual, Parity::even, t);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(v[static_cast<Eigen::Index>(i)], gauss(t[i]), 1e-9);
  const Vector vo = interpolate(g, sample(g.nodes(), odd_bump), Stagger::primary, Parity::odd, t);
  EXPECT_NEAR(vo[0], 0.0, 1e-15);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(vo[static_cast<Eigen::Index>(i)], odd_bump(t[i]), 1e-9);
  const std::vector<double> bad = {9.0};
  EXPECT_THROW(interpolate(g, xd, Stagger::dual, Parity::even, bad), ParameterError);
}

TEST(SobolevNorm, ZeroFunction) {
  const Grid g = build_grid(8.0, 64);
  for (int k : {0, 2, 4}) EXPECT_EQ(sobolev_norm(g, {Parity::odd, Vector::Zero(g.n)}, k), 0.0);
}

TEST(SobolevNorm, UnitNormalization) {
  const Grid g = build_grid(8.0, 128);
  Vector f = sample(g.nodes(), odd_bump);
  f /= l2_norm(g, f);
  EXPECT_NEAR(sobolev_norm(g, {Parity::odd, f}, 0), 1.0, 1e-14);
}

TEST(SobolevNorm, NestedInK) {
  const Grid g = build_grid(8.0, 128);
  const GridFunction f{Parity::even, sample(g.dual_nodes(), gauss)};
  const double n0 = sobolev_norm(g, f, 0);
  const double n2 = sobolev_norm(g, f, 2);
  const double n4 = sobolev_norm(g, f, 4);
  EXPECT_GE(n2, n0);
  EXPECT_GE(n4, n2);
  EXPECT_THROW(sobolev_norm(g, f, 1), ParameterError);
  EXPECT_THROW(sobolev_norm(g, f, 6), ParameterError);
}

TEST(SobolevNorm, GramMatchesNorm) {
  const Grid g = build_grid(8.0, 128);
  const GridFunction f{Parity::odd, sample(g.nodes(), odd_bump)};
  for (int k : {0, 2, 4}) {
    const SparseMatrix G = sobolev_gram(g, k, Parity::odd);
    const double via_gram = std::sqrt(g.weight() * f.values.dot(G * f.values));
    // The Gram form loses digits to cancellation: entries grow like h^{-2k}.
    const double tol = k == 0 ? 1e-14 : std::pow(g.h, -2.0 * k) * 1e-15;
    EXPECT_NEAR(via_gram, sobolev_norm(g, f, k), tol * via_gram) << "k = " << k;
  }
}

TEST(SobolevNorm, ContinuumValue) {
  // ||e^{-x^2}||^2 over the line = sqrt(pi/2).
  const Grid g = build_grid(8.0, 256);
  const double n0 = sobolev_norm(g, {Parity::even, sample(g.dual_nodes(), gauss)}, 0);
  EXPECT_NEAR(n0 * n0, std::sqrt(std::numbers::pi / 2.0), 1e-12);
}
