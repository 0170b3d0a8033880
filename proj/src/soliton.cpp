#include "chkp/soliton.hpp"

#include "chkp/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace chkp {

void SolitonParams::validate() const {
  if (!std::isfinite(c) || !std::isfinite(kappa))
    throw ParameterError("soliton parameters must be finite");
  if (!(kappa > 0.0)) throw ParameterError("kappa must be positive, got " + std::to_string(kappa));
  if (!(c > 2.0 * kappa))
    throw ParameterError("solitary waves exist only for c > 2 kappa; got c = " + std::to_string(c) +
                         ", 2 kappa = " + std::to_string(2.0 * kappa));
}

double SolitonParams::decay_rate() const { return std::sqrt(1.0 - 2.0 * kappa / c); }

SolitonCurve::SolitonCurve(SolitonParams params) : params_(params) { params_.validate(); }

double SolitonCurve::position_of(double q) const {
  const double a = params_.crest();
  if (q >= a) return 0.0;
  return position_from_gap(std::sqrt(a - q), q);
}

double SolitonCurve::position_from_gap(double t, double q) const {
  const double c = params_.c;
  const double k = params_.kappa;
  const double a = params_.crest();
  const double y = t * std::sqrt(c / (a * (c - q)));
  const double one_minus_y2 = 2.0 * k * q / (a * (c - q));
  return std::sqrt(c / a) * std::log((1.0 + y) * (1.0 + y) / one_minus_y2) - 2.0 * std::asinh(t / std::sqrt(2.0 * k));
}

double SolitonCurve::value(double x) const {
  const double a = params_.crest();
  const double c = params_.c;
  x = std::abs(x);
  if (x == 0.0) return a;

  // Near the crest use t = sqrt(a - Q) (x is smooth in t); in the tail use
  // u = log Q (x is close to linear in u). Both are monotone, so a bracketed
  // Newton iteration with bisection fallback is safe.
  const double split = position_of(0.5 * a);
  if (x <= split) {
    double lo = 0.0, hi = std::sqrt(0.5 * a);
    double t = std::min(hi, x / (2.0 * std::sqrt(c) / a));  // dx/dt at t = 0
    for (int it = 0; it < 200; ++it) {
      const double q = a - t * t;
      const double f = position_from_gap(t, q) - x;
      if (f > 0.0) hi = t; else lo = t;
      const double dfdt = 2.0 * std::sqrt(c - q) / q;
      double next = t - f / dfdt;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(t, 1e-300) ||
          hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
        t = next;
        return a - t * t;
      }
      t = next;
    }
    throw SolverError("soliton root finder (crest branch) did not converge at x = " + std::to_string(x));
  }

  double lo = -800.0, hi = std::log(0.5 * a);
  double u = std::log(a) - std::sqrt((a) / c) * x;
  u = std::clamp(u, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double q = std::exp(u);
    const double f = position_of(q) - x;  // decreasing in u
    if (f > 0.0) lo = u; else hi = u;
    const double dfdu = -std::sqrt((c - q) / (a - q));
    double next = u - f / dfdu;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-15 || hi - lo <= 1e-15) return std::exp(next);
    u = next;
  }
  throw SolverError("soliton root finder (tail branch) did not converge at x = " + std::to_string(x));
}

double SolitonCurve::slope(double x, double q) const {
  const double a = params_.crest();
  const double mag = q * std::sqrt(std::max(a - q, 0.0) / (params_.c - q));
  return x >= 0.0 ? -mag : mag;
}

double SolitonCurve::curvature(double q, double qx) const {
  const double c = params_.c;
  return ((c - 2.0 * params_.kappa) * q - 1.5 * q * q + 0.5 * qx * qx) / (c - q);
}

namespace {

ProfileSamples sample(const SolitonCurve& curve, const Vector& x) {
  ProfileSamples s;
  s.x = x;
  s.Q.resize(x.size());
  s.Qx.resize(x.size());
  s.Qxx.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double q = curve.value(x[i]);
    const double qx = curve.slope(x[i], q);
    s.Q[i] = q;
    s.Qx[i] = qx;
    s.Qxx[i] = curve.curvature(q, qx);
  }
  return s;
}

ProfileSamples zeros(const Vector& x) {
  return {x, Vector::Zero(x.size()), Vector::Zero(x.size()), Vector::Zero(x.size())};
}

}  // namespace

SolitonProfile SolitonProfile::zero(const SolitonParams& params, const Grid& grid) {
  params.validate();
  SolitonProfile p;
  p.params = params;
  p.grid = grid;
  p.primary = zeros(grid.nodes());
  p.dual = zeros(grid.dual_nodes());
  p.crest_value = 0.0;
  p.alpha = params.decay_rate();
  return p;
}

SolitonProfile solve_profile(const SolitonParams& params, const Grid& grid) {
  params.validate();
  const double alpha = params.decay_rate();
  if (alpha * grid.h > 0.25)
    throw ParameterError("grid too coarse for the soliton decay scale: alpha*h = " +
                         std::to_string(alpha * grid.h) + " > 0.25");
  const SolitonCurve curve(params);
  SolitonProfile p;
  p.params = params;
  p.grid = grid;
  p.primary = sample(curve, grid.nodes());
  p.dual = sample(curve, grid.dual_nodes());
  p.crest_value = curve.value(0.0);
  p.alpha = alpha;
  return p;
}

int closure_layer(const Grid& grid) { return 3 * grid.order(); }

double ode_residual(const SolitonProfile& profile) {
  const Grid& g = profile.grid;
  const double c = profile.params.c;
  const double k = profile.params.kappa;
  const DiffOperator d2 = diff_operator(g, 2, Parity::even);
  const Vector& Q = profile.dual.Q;
  const Vector Qxx = d2.matrix * Q;
  const Vector& Qx = profile.dual.Qx;
  const Vector r = (-c * Q + c * Qxx + 2.0 * k * Q + 1.5 * Q.cwiseProduct(Q) - 0.5 * Qx.cwiseProduct(Qx) -
                    Q.cwiseProduct(Qxx))
                       .eval();
  const int m = std::max(1, g.n - closure_layer(g));
  return std::sqrt(g.weight() * r.head(m).squaredNorm());
}

double first_integral_residual(const SolitonProfile& profile) {
  const double c = profile.params.c;
  const double a = profile.params.crest();
  double sum = 0.0;
  for (const ProfileSamples* s : {&profile.primary, &profile.dual}) {
    const Vector& Q = s->Q;
    const Vector r = (s->Qx.array().square() - Q.array().square() * (a - Q.array()) / (c - Q.array())).matrix();
    sum += profile.grid.weight() * r.squaredNorm();
  }
  return std::sqrt(0.5 * sum);
}

}  // namespace chkp
