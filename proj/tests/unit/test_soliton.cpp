#include "chkp/error.hpp"
#include "chkp/soliton.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace chkp;

namespace {

// x(q) by quadrature of dx = -dq / (q sqrt((a-q)/(c-q))) from the crest.
// Near the crest q = a - t^2 turns the integrand into 2 sqrt(c - a + t^2) / (a - t^2);
// in the tail u = log q gives sqrt((c - q)/(a - q)). Both are smooth.
double position_by_quadrature(const SolitonParams& p, double q) {
  using boost::math::quadrature::gauss_kronrod;
  const double a = p.crest();
  const double mid = 0.5 * a;
  auto crest = [&](double t) { return 2.0 * std::sqrt(p.c - a + t * t) / (a - t * t); };
  auto tail = [&](double u) {
    const double s = std::exp(u);
    return std::sqrt((p.c - s) / (a - s));
  };
  if (q >= mid) return gauss_kronrod<double, 61>::integrate(crest, 0.0, std::sqrt(a - q), 20, 1e-15);
  return gauss_kronrod<double, 61>::integrate(crest, 0.0, std::sqrt(a - mid), 20, 1e-15) +
         gauss_kronrod<double, 61>::integrate(tail, std::log(q), std::log(mid), 20, 1e-15);
}

}  // namespace

TEST(SolitonParams, Validation) {
  EXPECT_NO_THROW((SolitonParams{3.0, 1.0}.validate()));
  try {
    SolitonParams{2.0, 1.0}.validate();
    FAIL() << "c = 2 kappa accepted";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("c > 2 kappa"), std::string::npos);
  }
  EXPECT_THROW((SolitonParams{3.0, 0.0}.validate()), ParameterError);
  EXPECT_THROW((SolitonParams{1.0, 1.0}.validate()), ParameterError);
  EXPECT_DOUBLE_EQ((SolitonParams{3.0, 1.0}.decay_rate()), std::sqrt(1.0 / 3.0));
}

class ClosedForm : public ::testing::TestWithParam<std::pair<double, double>> {};

TEST_P(ClosedForm, MatchesQuadrature) {
  const SolitonParams p{GetParam().first, GetParam().second};
  const SolitonCurve curve(p);
  const double a = p.crest();
  for (double frac : {0.999999, 0.99, 0.9, 0.5, 0.1, 1e-3, 1e-8}) {
    const double q = frac * a;
    const double ref = position_by_quadrature(p, q);
    EXPECT_NEAR(curve.position_of(q), ref, 1e-10 * std::max(1.0, ref)) << "q/a = " << frac;
  }
}

TEST_P(ClosedForm, InverseRoundTrip) {
  const SolitonParams p{GetParam().first, GetParam().second};
  const SolitonCurve curve(p);
  for (double x : {1e-3, 0.1, 0.7, 1.5, 3.0, 10.0, 30.0, 60.0}) {
    const double q = curve.value(x);
    EXPECT_GT(q, 0.0);
    EXPECT_LE(q, p.crest());
    EXPECT_NEAR(curve.position_of(q), x, 1e-11 * std::max(1.0, x)) << "x = " << x;
    EXPECT_EQ(curve.value(-x), q);
  }
  EXPECT_EQ(curve.value(0.0), p.crest());
  // Next to the crest q carries no digits about x; compare with the Taylor expansion.
  const double x = 1e-6;
  EXPECT_NEAR(curve.value(x), p.crest() + 0.5 * curve.curvature(p.crest(), 0.0) * x * x, 1e-15);
}

INSTANTIATE_TEST_SUITE_P(Params, ClosedForm,
                         ::testing::Values(std::pair{3.0, 1.0}, std::pair{2.5, 1.0}, std::pair{10.0, 1.0},
                                           std::pair{1.0, 0.1}));

TEST(SolveProfile, CrestAndInvariants) {
  const SolitonParams p{3.0, 1.0};
  const Grid g = build_grid(40.0, 1024);
  const SolitonProfile prof = solve_profile(p, g);
  EXPECT_NEAR(prof.crest_value, 1.0, 1e-14);
  EXPECT_NEAR(prof.alpha, std::sqrt(1.0 / 3.0), 1e-15);
  for (const ProfileSamples* s : {&prof.primary, &prof.dual}) {
    for (Eigen::Index k = 0; k < s->Q.size(); ++k) {
      EXPECT_GT(s->Q[k], 0.0);
      EXPECT_LT(s->Q[k], prof.crest_value);
      EXPECT_GE(p.c - s->Q[k], 2.0 * p.kappa - 1e-10);
      EXPECT_LE(s->Qx[k], 0.0);
      if (k > 0) EXPECT_LT(s->Q[k], s->Q[k - 1]);
    }
  }
}

TEST(SolveProfile, ResidualsSmall) {
  const SolitonParams p{3.0, 1.0};
  const Grid g = build_grid(40.0, 1024);
  const SolitonProfile prof = solve_profile(p, g);
  const double qn = l2_norm(g, prof.dual.Q);
  EXPECT_LT(ode_residual(prof), 1e-8 * qn);
  EXPECT_LT(first_integral_residual(prof), 1e-6 * qn);
}

TEST(SolveProfile, CrestNodeSlopeVanishes) {
  const Grid g = build_grid(40.0, 1024);
  const SolitonProfile prof = solve_profile({3.0, 1.0}, g);
  // Q' is odd; at the first dual node h/2 it is O(h).
  EXPECT_LT(prof.dual.Qx[0] * prof.dual.Qx[0], g.h * g.h);
}

TEST(SolveProfile, TailDecayRate) {
  const SolitonParams p{3.0, 1.0};
  const Grid g = build_grid(40.0, 1024);
  const SolitonProfile prof = solve_profile(p, g);
  const int i0 = static_cast<int>(20.0 / g.h), i1 = static_cast<int>(35.0 / g.h);
  const double slope =
      (std::log(prof.primary.Q[i1]) - std::log(prof.primary.Q[i0])) / (prof.primary.x[i1] - prof.primary.x[i0]);
  EXPECT_NEAR(-slope, prof.alpha, 0.02 * prof.alpha);
  // Envelope Q(L) <= Q(0) exp(-alpha (L - x0)) with x0 = log(4 c / a...) bounded
  const double x0 = std::log(prof.crest_value / prof.primary.Q[g.n - 1]) / prof.alpha;
  EXPECT_LT(std::abs(x0 - g.half_length), 5.0);
}

TEST(SolveProfile, ZeroProfile) {
  const Grid g = build_grid(10.0, 64);
  const SolitonProfile z = SolitonProfile::zero({3.0, 1.0}, g);
  EXPECT_EQ(ode_residual(z), 0.0);
  EXPECT_EQ(first_integral_residual(z), 0.0);
}

TEST(SolveProfile, PerturbationRaisesResidual) {
  const Grid g = build_grid(40.0, 1024);
  SolitonProfile prof = solve_profile({3.0, 1.0}, g);
  const double base = ode_residual(prof);
  for (Eigen::Index k = 0; k < g.n; ++k) {
    const double x = prof.dual.x[k];
    prof.dual.Q[k] += 1e-3 * std::exp(-(x - 2.0) * (x - 2.0));
  }
  const double bumped = ode_residual(prof);
  EXPECT_GT(bumped, 1e-5);
  EXPECT_LT(bumped, 1e-1);
  EXPECT_GT(bumped, 1e3 * base);
}

TEST(SolveProfile, RefinementStable) {
  const SolitonParams p{3.0, 1.0};
  const SolitonProfile a = solve_profile(p, build_grid(40.0, 512));
  const SolitonProfile b = solve_profile(p, build_grid(40.0, 1024));
  EXPECT_LE(std::abs(a.crest_value - b.crest_value), 1e-6 * p.crest());
  // Shared nodes: primary node k of the coarse grid is node 2k+1 of the fine grid.
  for (int k = 0; k < 512; k += 37) EXPECT_NEAR(a.primary.Q[k], b.primary.Q[2 * k + 1], 1e-14);
}

TEST(SolveProfile, CoarseGridRejected) {
  EXPECT_THROW(solve_profile({3.0, 1.0}, build_grid(40.0, 8)), ParameterError);
}

TEST(SolveProfile, EvenInX) {
  const SolitonCurve curve({3.0, 1.0});
  for (double x : {0.3, 1.7, 9.1}) {
    EXPECT_EQ(curve.value(x), curve.value(-x));
    EXPECT_EQ(curve.slope(x, curve.value(x)), -curve.slope(-x, curve.value(-x)));
  }
}
