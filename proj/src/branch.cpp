#include "chkp/branch.hpp"

#include "chkp/error.hpp"
#include "chkp/spectra.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace chkp {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

LinearMode linear_mode(const OperatorL& L, const Grid& grid) {
  const SpectrumReport r = eig_L_odd(L, grid);
  if (r.counts.negative != 1)
    throw SolverError("L has " + std::to_string(r.counts.negative) + " negative eigenvalues on odd functions; need 1");
  LinearMode m;
  m.phi = {Parity::odd, r.vectors.col(0)};
  m.lambda = r.scalars.at("lambda");
  m.omega0 = std::sqrt(-m.lambda);
  m.residual = r.scalars.at("eigenpair_residual");
  return m;
}

Vector PeriodicSolution::mode_norms(const Grid& grid) const {
  Vector out(static_cast<int>(modes.size()));
  for (std::size_t m = 0; m < modes.size(); ++m) out[static_cast<int>(m)] = l2_norm(grid, modes[m].values);
  return out;
}

Vector refine_odd(const Grid& coarse, const Vector& values) {
  const Vector mid = stagger_interpolation(coarse, Stagger::primary, Parity::odd) * values;
  Vector fine(2 * coarse.n);
  for (int k = 0; k < coarse.n; ++k) {
    fine[2 * k] = mid[k];
    fine[2 * k + 1] = values[k];
  }
  return fine;
}

PeriodicSolution zero_solution(const Grid& grid, int ny, double omega, double s) {
  PeriodicSolution p;
  p.modes.assign(static_cast<std::size_t>(ny + 1), GridFunction{Parity::odd, Vector::Zero(grid.n)});
  p.omega = omega;
  p.s = s;
  return p;
}

ModalProblem::ModalProblem(const OperatorL& L, const Grid& grid, LinearMode mode, int ny)
    : L_(L), grid_(grid), mode_(std::move(mode)), ny_(ny), calc_(grid) {
  L_.matrix.makeCompressed();
  if (ny < 1) throw ParameterError("need at least one harmonic; got Ny = " + std::to_string(ny));
  if (L_.matrix.rows() != grid.n || mode_.phi.values.size() != grid.n)
    throw ParityError("operator or linear mode does not match the grid");
  if (mode_.phi.parity != Parity::odd) throw ParityError("the linear mode must be odd");
  const int J = 2 * ny;
  synth_.resize(J + 1, ny + 1);
  project_.resize(ny + 1, J + 1);
  for (int j = 0; j <= J; ++j) {
    const double w = (j == 0 || j == J) ? 0.5 : 1.0;
    for (int m = 0; m <= ny; ++m) {
      // cos(m pi j / J) with the angle reduced to [0, 2 pi) in integers.
      const double c = std::cos(std::numbers::pi * static_cast<double>((m * j) % (2 * J)) / J);
      synth_(j, m) = c;
      project_(m, j) = (m == 0 ? 1.0 : 2.0) * w * c / J;
    }
  }
  build_pattern();

  shift_ = 2.0 * std::abs(mode_.lambda);
  SparseMatrix shifted = L_.matrix;
  for (int i = 0; i < grid.n; ++i) shifted.coeffRef(i, i) += shift_;
  smoother_ = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(shifted);
  if (smoother_->info() != Eigen::Success) throw SolverError("factorization of L + 2|lambda| failed");
}

void ModalProblem::check(const PeriodicSolution& state) const {
  if (state.harmonics() != ny_)
    throw ParameterError("state has " + std::to_string(state.harmonics()) + " harmonics; expected " +
                         std::to_string(ny_));
  for (std::size_t m = 0; m < state.modes.size(); ++m) {
    if (state.modes[m].parity != Parity::odd) throw ParityError("mode a_" + std::to_string(m) + " is not odd");
    if (state.modes[m].values.size() != grid_.n)
      throw ParityError("mode a_" + std::to_string(m) + " does not match the grid");
  }
}

Matrix ModalProblem::stations_of(const std::vector<GridFunction>& modes) const {
  Matrix a(grid_.n, ny_ + 1);
  for (int m = 0; m <= ny_; ++m) a.col(m) = modes[static_cast<std::size_t>(m)].values;
  return a * synth_.transpose();
}

std::vector<Vector> ModalProblem::nonlinear_modes(const PeriodicSolution& state) const {
  check(state);
  const Matrix psi = stations_of(state.modes);
  Matrix nj(grid_.n, psi.cols());
  for (int j = 0; j < psi.cols(); ++j) nj.col(j) = apply_N(calc_, psi.col(j));
  const Matrix coeff = nj * project_.transpose();
  std::vector<Vector> out;
  for (int m = 0; m <= ny_; ++m) out.emplace_back(coeff.col(m));
  return out;
}

ModalResidual ModalProblem::residual(const PeriodicSolution& state) const {
  ModalResidual r;
  r.modes = nonlinear_modes(state);
  const double w2 = state.omega * state.omega;
  for (int m = 0; m <= ny_; ++m) {
    const Vector& a = state.modes[static_cast<std::size_t>(m)].values;
    r.modes[static_cast<std::size_t>(m)] -= L_.apply(a) + (m * m * w2) * a;
  }
  r.amplitude = l2_inner(grid_, state.modes[1].values, mode_.phi.values) - state.s;
  return r;
}

double ModalProblem::norm(const ModalResidual& r) const {
  double sum = r.amplitude * r.amplitude;
  for (const Vector& rm : r.modes) {
    const double v = l2_norm(grid_, smoother_->solve(rm));
    sum += v * v;
  }
  return std::sqrt(sum);
}


double ModalProblem::raw_norm(const ModalResidual& r) const {
  double sum = r.amplitude * r.amplitude;
  for (const Vector& rm : r.modes) {
    const double v = l2_norm(grid_, rm);
    sum += v * v;
  }
  return std::sqrt(sum);
}

Vector ModalProblem::pack(const PeriodicSolution& state) const {
  check(state);
  const int stride = ny_ + 1;
  Vector x(unknowns());
  for (int m = 0; m <= ny_; ++m)
    for (int k = 0; k < grid_.n; ++k) x[k * stride + m] = state.modes[static_cast<std::size_t>(m)].values[k];
  x[unknowns() - 1] = state.omega;
  return x;
}

void ModalProblem::unpack(const Vector& x, PeriodicSolution& state) const {
  if (x.size() != unknowns()) throw ParameterError("packed state has the wrong size");
  const int stride = ny_ + 1;
  state.modes.assign(static_cast<std::size_t>(stride), GridFunction{Parity::odd, Vector(grid_.n)});
  for (int m = 0; m <= ny_; ++m)
    for (int k = 0; k < grid_.n; ++k) state.modes[static_cast<std::size_t>(m)].values[k] = x[k * stride + m];
  state.omega = x[unknowns() - 1];
}

Vector ModalProblem::pack(const ModalResidual& r) const {
  const int stride = ny_ + 1;
  Vector x(unknowns());
  for (int m = 0; m <= ny_; ++m)
    for (int k = 0; k < grid_.n; ++k) x[k * stride + m] = r.modes[static_cast<std::size_t>(m)][k];
  x[unknowns() - 1] = r.amplitude;
  return x;
}

namespace {

SparseMatrix abs_pattern(const SparseMatrix& a) {
  SparseMatrix b = a;
  for (int i = 0; i < b.nonZeros(); ++i) b.valuePtr()[i] = 1.0;
  return b;
}

int find_entry(const SparseMatrix& a, int row, int col) {
  const int* begin = a.innerIndexPtr() + a.outerIndexPtr()[col];
  const int* end = a.innerIndexPtr() + a.outerIndexPtr()[col + 1];
  const int* it = std::lower_bound(begin, end, row);
  if (it == end || *it != row) throw std::logic_error("entry outside the Jacobian pattern");
  return static_cast<int>(it - a.innerIndexPtr());
}

}  // namespace

void ModalProblem::build_pattern() {
  const int n = grid_.n;
  const int stride = ny_ + 1;
  const SparseMatrix td2 = calc_.to_dual * calc_.d2;
  const SparseMatrix* right[3] = {&td2, &calc_.d3, &calc_.d1};

  SparseMatrix identity(n, n);
  identity.setIdentity();
  block_pattern_ = abs_pattern(L_.matrix) + identity;
  for (const SparseMatrix* r : right) block_pattern_ += abs_pattern(calc_.d_eo) * abs_pattern(*r);
  block_pattern_.makeCompressed();

  // (D_eo diag(v) A)(r, c) = sum_k D_eo(r, k) v_k A(k, c).
  for (int t = 0; t < 3; ++t) {
    const SparseMatrix& a = *right[t];
    for (int c = 0; c < a.outerSize(); ++c)
      for (SparseMatrix::InnerIterator ia(a, c); ia; ++ia)
        for (SparseMatrix::InnerIterator id(calc_.d_eo, ia.row()); id; ++id)
          terms_[t].push_back({find_entry(block_pattern_, id.row(), c), static_cast<int>(ia.row()),
                               id.value() * ia.value()});
  }
  for (int c = 0; c < L_.matrix.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(L_.matrix, c); it; ++it)
      l_pos_.push_back(find_entry(block_pattern_, it.row(), c));
  for (int i = 0; i < n; ++i) diag_pos_.push_back(find_entry(block_pattern_, i, i));

  // Global structure: block (m, m') entry (r, c) -> (r stride + m, c stride + m'),
  // omega column last, amplitude row last.
  const int size = unknowns();
  std::vector<Eigen::Triplet<double>> t;
  for (int c = 0; c < n; ++c)
    for (SparseMatrix::InnerIterator it(block_pattern_, c); it; ++it)
      for (int mp = 0; mp <= ny_; ++mp)
        for (int m = 0; m <= ny_; ++m) t.emplace_back(it.row() * stride + m, c * stride + mp, 0.0);
  for (int k = 0; k < n; ++k) {
    for (int m = 0; m <= ny_; ++m) t.emplace_back(k * stride + m, size - 1, 0.0);
    t.emplace_back(size - 1, k * stride + 1, 0.0);
  }
  t.emplace_back(size - 1, size - 1, 0.0);
  jacobian_pattern_.resize(size, size);
  jacobian_pattern_.setFromTriplets(t.begin(), t.end());
  jacobian_pattern_.makeCompressed();
  lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix, Eigen::AMDOrdering<int>>>();
  lu_->analyzePattern(jacobian_pattern_);
}

SparseMatrix ModalProblem::jacobian(const PeriodicSolution& state) const {
  check(state);
  const int n = grid_.n;
  const int stride = ny_ + 1;
  const int size = unknowns();
  const Matrix psi = stations_of(state.modes);
  const Matrix px = calc_.d1 * psi;
  // Station values multiplying T D2, D3 and D1 respectively.
  const Matrix cf[3] = {calc_.to_dual * (calc_.d2 * psi), px, calc_.d3 * psi - 3.0 * px};

  SparseMatrix j = jacobian_pattern_;
  double* out = j.valuePtr();
  const int* bstart = block_pattern_.outerIndexPtr();
  const int* gstart = j.outerIndexPtr();
  const double w2 = state.omega * state.omega;
  Vector vals(block_pattern_.nonZeros());
  for (int m = 0; m <= ny_; ++m) {
    for (int mp = 0; mp <= ny_; ++mp) {
      // Weight of station j in the (m, m') block: project(m, j) cos(m' theta_j).
      const Vector w = project_.row(m).transpose().cwiseProduct(synth_.col(mp));
      vals.setZero();
      for (int t = 0; t < 3; ++t) {
        const Vector v = cf[t] * w;
        for (const Contribution& e : terms_[t]) vals[e.pos] += e.weight * v[e.node];
      }
      if (m == mp) {
        for (std::size_t i = 0; i < l_pos_.size(); ++i) vals[l_pos_[i]] -= L_.matrix.valuePtr()[i];
        for (int p : diag_pos_) vals[p] -= m * m * w2;
      }
      for (int c = 0; c < n; ++c) {
        const int base = gstart[c * stride + mp];
        for (int p = bstart[c]; p < bstart[c + 1]; ++p) out[base + (p - bstart[c]) * stride + m] = vals[p];
      }
    }
  }
  // omega column: rows k stride + m in order, then the amplitude row.
  const int wbase = gstart[size - 1];
  for (int k = 0; k < n; ++k)
    for (int m = 0; m <= ny_; ++m)
      out[wbase + k * stride + m] = -2.0 * m * m * state.omega * state.modes[static_cast<std::size_t>(m)].values[k];
  const double wgt = grid_.weight();
  for (int k = 0; k < n; ++k) out[gstart[k * stride + 2] - 1] = wgt * mode_.phi.values[k];
  return j;
}

Vector ModalProblem::newton_step(const PeriodicSolution& state, const ModalResidual& r) const {
  lu_->factorize(jacobian(state));
  if (lu_->info() != Eigen::Success)
    throw SolverError("singular Newton Jacobian at s = " + fmt(state.s) + ": " + lu_->lastErrorMessage());
  return -lu_->solve(pack(r));
}

PeriodicSolution newton_correct(const ModalProblem& problem, PeriodicSolution guess, const NewtonOptions& opts) {
  PeriodicSolution state = std::move(guess);
  state.history.clear();
  Vector x = problem.pack(state);
  for (int it = 0;; ++it) {
    const ModalResidual r = problem.residual(state);
    const double norm = problem.norm(r);
    state.history.push_back(norm);
    if (!std::isfinite(norm))
      throw SolverError("Newton iterate became non-finite at s = " + fmt(state.s), state.history);
    if (norm <= opts.tol) {
      state.newton_iters = it;
      state.final_residual = norm;
      return state;
    }
    if (it == opts.max_iter)
      throw SolverError("Newton did not reach " + fmt(opts.tol) + " in " + std::to_string(opts.max_iter) +
                            " iterations at s = " + fmt(state.s) + "; last residual " + fmt(norm),
                        state.history);
    try {
      x += problem.newton_step(state, r);
    } catch (const SolverError& e) {
      throw SolverError(e.what(), state.history);
    }
    problem.unpack(x, state);
  }
}

std::vector<double> branch_amplitudes(double ds, double s_max) {
  if (!(ds > 0.0)) throw ParameterError("ds must be positive; got " + fmt(ds));
  const int count = std::max(1, static_cast<int>(std::floor(s_max / ds * (1.0 + 1e-12))));
  std::vector<double> s(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) s[static_cast<std::size_t>(k)] = (k + 1) * ds;
  return s;
}

Branch continue_branch(const ModalProblem& problem, const BranchSettings& settings) {
  if (settings.ny != problem.harmonics()) throw ParameterError("settings and problem disagree on Ny");
  Branch b;
  b.omega0 = problem.mode().omega0;
  b.lambda = problem.mode().lambda;
  b.phi = problem.mode().phi;
  const NewtonOptions opts{settings.tol, settings.max_iter};

  const PeriodicSolution origin = zero_solution(problem.grid(), settings.ny, b.omega0, 0.0);
  for (double s : branch_amplitudes(settings.ds, settings.s_max)) {
    PeriodicSolution guess;
    if (b.points.empty()) {
      guess = origin;
      guess.modes[1].values = s * b.phi.values;
    } else {
      const PeriodicSolution& last = b.points.back();
      const PeriodicSolution& before = b.points.size() > 1 ? b.points[b.points.size() - 2] : origin;
      const double t = (s - last.s) / (last.s - before.s);
      const Vector x1 = problem.pack(last);
      problem.unpack(x1 + t * (x1 - problem.pack(before)), guess);
    }
    guess.s = s;
    try {
      b.points.push_back(newton_correct(problem, std::move(guess), opts));
    } catch (const SolverError& e) {
      b.truncated = true;
      b.failed_s = s;
      b.failure = e.what();
      b.failure_history = e.history();
      break;
    }
  }
  return b;
}

Branch continue_branch(const OperatorL& L, const Grid& grid, const BranchSettings& settings) {
  const ModalProblem problem(L, grid, linear_mode(L, grid), settings.ny);
  return continue_branch(problem, settings);
}

RefinedCheck::RefinedCheck(const SolitonProfile& profile, const LinearMode& mode, int ny) : coarse_(profile.grid) {
  const Grid fine = build_grid(profile.grid.half_length, 2 * profile.grid.n, profile.grid.family);
  const SolitonProfile fp = solve_profile(profile.params, fine);
  LinearMode fm = mode;
  fm.phi.values = refine_odd(coarse_, mode.phi.values);
  fine_ = std::make_unique<ModalProblem>(assemble_L(fp), fine, fm, 2 * ny);
}

double RefinedCheck::operator()(const PeriodicSolution& state) const {
  PeriodicSolution f = zero_solution(fine_->grid(), fine_->harmonics(), state.omega, state.s);
  for (std::size_t m = 0; m < state.modes.size(); ++m) f.modes[m].values = refine_odd(coarse_, state.modes[m].values);
  ModalResidual r = fine_->residual(f);
  r.amplitude = 0.0;
  return fine_->norm(r);
}

FieldTable reconstruct(const PeriodicSolution& state, const SolitonProfile& profile, int y_samples) {
  if (y_samples < 1) throw ParameterError("need at least one y interval");
  const Grid& g = profile.grid;
  const int n = g.n;
  const int nx = 2 * n + 1;
  FieldTable t;
  t.x.resize(nx);
  const Vector nodes = g.nodes();
  for (int k = 0; k < n; ++k) {
    t.x[n - 1 - k] = -nodes[k];
    t.x[n + 1 + k] = nodes[k];
  }
  t.x[n] = 0.0;

  // phi_m = D1 a_m, moved from the dual nodes to 0 and the primary nodes.
  std::vector<double> targets(static_cast<std::size_t>(n + 1));
  targets[0] = 0.0;
  for (int k = 0; k < n; ++k) targets[static_cast<std::size_t>(k + 1)] = nodes[k];
  const SparseMatrix d1 = diff_operator(g, 1, Parity::odd).matrix;
  std::vector<Vector> phi_m;
  for (const GridFunction& a : state.modes)
    phi_m.push_back(interpolate(g, d1 * a.values, Stagger::dual, Parity::even, targets));

  const double period = 2.0 * std::numbers::pi / state.omega;
  t.y.resize(y_samples + 1);
  const std::size_t total = static_cast<std::size_t>(nx) * static_cast<std::size_t>(y_samples + 1);
  t.psi = Vector::Zero(static_cast<int>(total));
  t.psi_y = t.psi;
  t.phi = t.psi;
  t.v = t.psi;
  const Vector& Q = profile.primary.Q;
  for (int i = 0; i <= y_samples; ++i) {
    t.y[i] = period * i / y_samples;
    Vector psi = Vector::Zero(n), psi_y = Vector::Zero(n), phi = Vector::Zero(n + 1);
    for (std::size_t m = 0; m < state.modes.size(); ++m) {
      const long r = (static_cast<long>(m) * i) % y_samples;
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(r) / y_samples;
      psi += std::cos(theta) * state.modes[m].values;
      psi_y -= (static_cast<double>(m) * state.omega * std::sin(theta)) * state.modes[m].values;
      phi += std::cos(theta) * phi_m[m];
    }
    const int row = i * nx;
    for (int k = 0; k < n; ++k) {
      t.psi[row + n + 1 + k] = psi[k];
      t.psi[row + n - 1 - k] = -psi[k];
      t.psi_y[row + n + 1 + k] = psi_y[k];
      t.psi_y[row + n - 1 - k] = -psi_y[k];
      t.phi[row + n + 1 + k] = phi[k + 1];
      t.phi[row + n - 1 - k] = phi[k + 1];
      t.v[row + n + 1 + k] = phi[k + 1] + Q[k];
      t.v[row + n - 1 - k] = phi[k + 1] + Q[k];
    }
    t.phi[row + n] = phi[0];
    t.v[row + n] = phi[0] + profile.crest_value;
  }
  return t;
}

}  // namespace chkp
