#pragma once

// Camassa-Holm solitary wave Q(x) of speed c, crest at the origin.
//
// Q solves  -cQ + cQ'' + 2 kappa Q + 3/2 Q^2 - 1/2 Q'^2 - Q Q'' = 0  and decays
// at infinity. Multiplying by Q' and integrating gives the first integral
//   Q'^2 = Q^2 (a - Q) / (c - Q),   a = c - 2 kappa,
// which is separable and integrates in closed form:
//   x(Q) = sqrt(c/a) log((1+y)^2 / (1-y^2)) - 2 asinh(sqrt((a-Q)/(2 kappa))),
//   y^2 = c (a-Q) / (a (c-Q)),   1 - y^2 = 2 kappa Q / (a (c-Q)).

#include "chkp/grid.hpp"

namespace chkp {

struct SolitonParams {
  double c = 3.0;
  double kappa = 1.0;

  /// Throws ParameterError unless c > 2 kappa > 0.
  void validate() const;
  double crest() const { return c - 2.0 * kappa; }
  /// Exponential decay rate sqrt(1 - 2 kappa / c).
  double decay_rate() const;
};

/// Pointwise evaluation of Q, Q', Q'' for any x.
class SolitonCurve {
 public:
  explicit SolitonCurve(SolitonParams params);

  const SolitonParams& params() const { return params_; }

  /// Distance from the crest at which the profile takes the value q in (0, a].
  double position_of(double q) const;
  double value(double x) const;
  /// Q' from the first integral (sign from x).
  double slope(double x, double q) const;
  /// Q'' from the ODE solved for Q''.
  double curvature(double q, double qx) const;

 private:
  // position_of with t = sqrt(a - q) supplied exactly, for use near the crest.
  double position_from_gap(double t, double q) const;
  SolitonParams params_;
};

struct ProfileSamples {
  Vector x, Q, Qx, Qxx;
};

struct SolitonProfile {
  SolitonParams params;
  Grid grid;
  ProfileSamples primary;  // at k h
  ProfileSamples dual;     // at (k - 1/2) h
  double crest_value = 0.0;
  double alpha = 0.0;

  const ProfileSamples& on(Stagger s) const { return s == Stagger::primary ? primary : dual; }

  /// Q == 0 on the same grid, for constant-coefficient reference operators.
  static SolitonProfile zero(const SolitonParams& params, const Grid& grid);
};

/// Samples Q, Q', Q'' on both staggers; throws SolverError if the root
/// finder fails and ParameterError if the grid does not resolve the decay
/// scale (alpha h > 0.25).
SolitonProfile solve_profile(const SolitonParams& params, const Grid& grid);

/// Discrete L2 norm of the travelling-wave ODE residual with Q'' recomputed
/// from Q by the grid's second-derivative operator. Evaluated on dual nodes
/// away from the far-field closure layer.
double ode_residual(const SolitonProfile& profile);

/// Discrete L2 norm of Q'^2 - Q^2 (a - Q)/(c - Q) on both staggers.
double first_integral_residual(const SolitonProfile& profile);

/// Number of trailing nodes treated as the far-field closure layer.
int closure_layer(const Grid& grid);

}  // namespace chkp
