#include "chkp/operators.hpp"

#include "chkp/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace chkp {

namespace {

SparseMatrix diagonal(const Vector& d) {
  SparseMatrix m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Eigen::Index i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  m.makeCompressed();
  return m;
}

SparseMatrix transpose(const SparseMatrix& a) { return SparseMatrix(a.transpose()); }

// (A + A^T) / 2: removes the rounding asymmetry of triple products exactly.
SparseMatrix symmetrized(const SparseMatrix& a) {
  SparseMatrix s = 0.5 * (a + transpose(a));
  s.makeCompressed();
  return s;
}

void check_profile(const SolitonProfile& p) {
  if (p.primary.Q.size() != p.grid.n || p.dual.Q.size() != p.grid.n)
    throw ParameterError("profile samples do not match its grid");
}

}  // namespace

OperatorM assemble_M(const SolitonProfile& profile, Parity parity) {
  check_profile(profile);
  const Grid& g = profile.grid;
  const double c = profile.params.c;
  const double shift = profile.params.crest();
  const SparseMatrix d = diff_operator(g, 1, parity).matrix;
  const ProfileSamples& here = profile.on(stagger_of(parity));
  const ProfileSamples& there = profile.on(stagger_of(flip(parity)));
  const Vector stiffness = (c - there.Q.array()).matrix();
  const Vector potential = (here.Qxx.array() - 3.0 * here.Q.array() + shift).matrix();
  OperatorM m;
  m.parity = parity;
  m.matrix = symmetrized(transpose(d) * diagonal(stiffness) * d + diagonal(potential));
  return m;
}

OperatorL assemble_L(const SolitonProfile& profile) {
  const SparseMatrix d = diff_operator(profile.grid, 1, Parity::odd).matrix;
  const OperatorM me = assemble_M(profile, Parity::even);
  OperatorL l;
  l.matrix = symmetrized(transpose(d) * me.matrix * d);
  l.d = d;
  l.m = me.matrix;
  return l;
}

Vector OperatorL::apply(const Vector& x) const {
  if (d.size() == 0) return matrix * x;
  return d.transpose() * (m * (d * x));
}

OperatorL assemble_L_expanded(const SolitonProfile& profile) {
  check_profile(profile);
  const Grid& g = profile.grid;
  const double c = profile.params.c;
  const SparseMatrix d2 = diff_operator(g, 2, Parity::odd).matrix;
  const SparseMatrix d_oe = diff_operator(g, 1, Parity::odd).matrix;
  const SparseMatrix d_eo = diff_operator(g, 1, Parity::even).matrix;
  const Vector stiffness = (c - profile.primary.Q.array()).matrix();
  const Vector drift = (profile.dual.Qxx.array() - 3.0 * profile.dual.Q.array()).matrix();
  OperatorL l;
  l.matrix = d2 * diagonal(stiffness) * d2 - profile.params.crest() * d2 - d_eo * diagonal(drift) * d_oe;
  l.matrix.makeCompressed();
  return l;
}

LiouvilleMap::LiouvilleMap(const SolitonProfile& profile) : profile_(profile) {
  check_profile(profile);
  a_ = profile.params.crest();
  c_ = profile.params.c;
  flat_ = profile.crest_value == 0.0;
  z_max_ = z_of_x(profile.grid.half_length);
  auto fill = [&](const ProfileSamples& s, Vector& z, Vector& w) {
    z.resize(s.x.size());
    w.resize(s.x.size());
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      z[i] = z_of_x(s.x[i]);
      w[i] = std::pow(c_ - s.Q[i], 0.25);
    }
  };
  fill(profile.primary, z_primary_, w_primary_);
  fill(profile.dual, z_dual_, w_dual_);
}

double LiouvilleMap::z_of_x(double x) const {
  if (flat_) return x / std::sqrt(c_);
  // dz/dQ = -1 / (Q sqrt(a - Q)), so z = (2/sqrt(a)) atanh(sqrt((a - Q)/a)),
  // written with 1 - y^2 = Q/a to keep digits in the tail.
  const double q = SolitonCurve(profile_.params).value(x);
  const double y = std::sqrt((a_ - q) / a_);
  const double z = std::log((1.0 + y) * (1.0 + y) * a_ / q) / std::sqrt(a_);
  return x < 0.0 ? -z : z;
}

double LiouvilleMap::Q_of_z(double z) const {
  if (flat_) return 0.0;
  const double s = 1.0 / std::cosh(0.5 * std::sqrt(a_) * z);
  return a_ * s * s;
}

double LiouvilleMap::x_of_z(double z) const {
  if (flat_) return z * std::sqrt(c_);
  const double x = SolitonCurve(profile_.params).position_of(Q_of_z(z));
  return z < 0.0 ? -x : x;
}

Vector LiouvilleMap::to_z(const Vector& psi, Parity parity, const Grid& z_grid) const {
  const Vector z = z_grid.points(parity);
  std::vector<double> x(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i)
    x[static_cast<std::size_t>(i)] = std::min(x_of_z(z[i]), profile_.grid.half_length);
  Vector out = interpolate(profile_.grid, psi, stagger_of(parity), parity, x);
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] *= std::pow(c_ - Q_of_z(z[i]), 0.25);
  return out;
}

Vector LiouvilleMap::to_x(const Vector& gamma, Parity parity, const Grid& z_grid) const {
  const Stagger s = stagger_of(parity);
  const Vector& z = z_nodes(s);
  std::vector<double> targets(z.data(), z.data() + z.size());
  for (double& t : targets) t = std::min(t, z_grid.half_length);
  Vector out = interpolate(z_grid, gamma, s, parity, targets);
  return out.cwiseQuotient(weight(s));
}

Grid liouville_grid(const LiouvilleMap& map) {
  return build_grid(map.z_max(), map.profile().grid.n, map.profile().grid.family);
}

OperatorK assemble_K(const LiouvilleMap& map, const Grid& z_grid, Parity parity) {
  const SolitonParams& p = map.profile().params;
  const double a = p.crest();
  const Vector z = z_grid.points(parity);
  OperatorK k;
  k.parity = parity;
  k.band_edge = a;
  k.potential.resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double q = map.Q_of_z(z[i]);
    const double qx2 = q * q * (a - q) / (p.c - q);
    const double qxx = ((p.c - 2.0 * p.kappa) * q - 1.5 * q * q + 0.5 * qx2) / (p.c - q);
    k.potential[i] = 0.75 * qxx - 3.0 * q - qx2 / (16.0 * (p.c - q));
  }
  const SparseMatrix d = diff_operator(z_grid, 1, parity).matrix;
  k.matrix = symmetrized(transpose(d) * d + diagonal((k.potential.array() + a).matrix()));
  return k;
}

OddCalculus::OddCalculus(const Grid& grid)
    : d1(diff_operator(grid, 1, Parity::odd).matrix),
      d2(diff_operator(grid, 2, Parity::odd).matrix),
      d3(diff_operator(grid, 3, Parity::odd).matrix),
      d_eo(diff_operator(grid, 1, Parity::even).matrix),
      to_dual(stagger_interpolation(grid, Stagger::primary, Parity::odd)) {}

Vector apply_N(const OddCalculus& ops, const Vector& psi) {
  const Vector px = ops.d1 * psi;
  const Vector pxx = ops.to_dual * (ops.d2 * psi);
  const Vector pxxx = ops.d3 * psi;
  const Vector inner = (0.5 * pxx.array().square() + px.array() * pxxx.array() - 1.5 * px.array().square()).matrix();
  return ops.d_eo * inner;
}

GridFunction apply_N(const Grid& grid, const GridFunction& psi) {
  if (psi.parity != Parity::odd) throw ParityError("N is defined on odd functions");
  if (psi.values.size() != grid.n) throw ParityError("grid function size does not match the grid");
  return {Parity::odd, apply_N(OddCalculus(grid), psi.values)};
}

SparseMatrix linearize_N(const OddCalculus& ops, const Vector& psi) {
  const Vector px = ops.d1 * psi;
  const Vector pxx = ops.to_dual * (ops.d2 * psi);
  const Vector pxxx = ops.d3 * psi;
  const SparseMatrix inner = diagonal(pxx) * ops.to_dual * ops.d2 + diagonal(px) * ops.d3 +
                             diagonal((pxxx - 3.0 * px).eval()) * ops.d1;
  SparseMatrix j = ops.d_eo * inner;
  j.makeCompressed();
  return j;
}

BlockOperator::BlockOperator(const Grid& grid, OperatorL L) : grid_(grid), L_(std::move(L)), calc_(grid) {
  if (L_.matrix.rows() != grid.n) throw ParameterError("L does not match the grid");
}

BlockState BlockOperator::apply(const BlockState& w) const { return {L_.matrix * w.w2, w.w1}; }

BlockState BlockOperator::nonlinearity(const BlockState& w) const {
  return {-apply_N(calc_, w.w2), Vector::Zero(w.w2.size())};
}

BlockState BlockOperator::reverse(const BlockState& w) { return {-w.w1, w.w2}; }

SparseMatrix BlockOperator::sparse() const {
  const int n = grid_.n;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(L_.matrix.nonZeros()) + n);
  for (int col = 0; col < L_.matrix.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(L_.matrix, col); it; ++it) t.emplace_back(it.row(), n + it.col(), it.value());
  for (int i = 0; i < n; ++i) t.emplace_back(n + i, i, 1.0);
  SparseMatrix b(2 * n, 2 * n);
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

SparseMatrix BlockOperator::reverser() const {
  const int n = grid_.n;
  Vector d(2 * n);
  d.head(n).setConstant(-1.0);
  d.tail(n).setConstant(1.0);
  return diagonal(d);
}

OperatorBundle assemble_all(const SolitonProfile& profile) {
  return {assemble_M(profile, Parity::even), assemble_M(profile, Parity::odd), assemble_L(profile)};
}

void dump_operator(const SparseMatrix& a, const std::string& stem, const std::string& name,
                   const SolitonProfile& profile) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dense(a);
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw ParameterError("cannot write " + stem + ".bin");
  bin.write(reinterpret_cast<const char*>(dense.data()), static_cast<std::streamsize>(dense.size() * sizeof(double)));
  nlohmann::ordered_json header = {
      {"operator", name},
      {"rows", dense.rows()},
      {"cols", dense.cols()},
      {"dtype", "float64"},
      {"layout", "row-major"},
      {"c", profile.params.c},
      {"kappa", profile.params.kappa},
      {"L_dom", profile.grid.half_length},
      {"n", profile.grid.n},
      {"family", std::string(to_string(profile.grid.family))},
  };
  std::ofstream js(stem + ".json");
  js << header.dump(2) << '\n';
}

}  // namespace chkp
