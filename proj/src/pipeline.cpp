#include "chkp/pipeline.hpp"

#include "chkp/io.hpp"
#include "chkp/linalg.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace chkp {

using nlohmann::ordered_json;

namespace {

constexpr const char* kTool = "chkp 0.1.0";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Runs one stage, converting failures into StageError and reporting the wall time.
template <typename F>
auto stage(const std::string& name, const Progress& progress, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  auto done = [&] {
    if (!progress) return;
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2fs", dt);
    progress(name + " " + buf);
  };
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      done();
    } else {
      auto out = body();
      done();
      return out;
    }
  } catch (const ParameterError&) {
    throw;
  } catch (const ParityError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const SolverError& e) {
    throw StageError(name, e.what(), e.history());
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void append(std::vector<Verdict>& out, const std::vector<Verdict>& more) { out.insert(out.end(), more.begin(), more.end()); }

// Eigenvalues of both parity blocks of M, merged and sorted.
Vector merged_M_eigenvalues(const SolitonProfile& profile) {
  const Vector ev = symmetric_eigen(Matrix(assemble_M(profile, Parity::even).matrix), false).values;
  const Vector od = symmetric_eigen(Matrix(assemble_M(profile, Parity::odd).matrix), false).values;
  Vector all(ev.size() + od.size());
  all << ev, od;
  std::sort(all.begin(), all.end());
  return all;
}

Vector even_probe(const Vector& x, int j) {
  return (-(x.array().square()) / (1.5 + j)).exp().matrix().cwiseProduct(
      (1.0 + 0.2 * j * x.array().square()).matrix());
}

Vector odd_probe(const Vector& x, int j) {
  return x.cwiseProduct((-(x.array().square()) / (2.0 + j)).exp().matrix())
      .cwiseProduct((1.0 + 0.1 * j * x.array().cos()).matrix());
}

// max over probes of |M psi - (c - Q)^{-1/4} K (c - Q)^{1/4} psi| / |M psi| on
// the interior, both parities.
double conjugacy_error(const SolitonProfile& profile) {
  const LiouvilleMap map(profile);
  const Grid zg = liouville_grid(map);
  const int interior = profile.grid.n - 4 * closure_layer(profile.grid);
  if (interior < 8) throw ParameterError("grid too small for the conjugacy check");
  double worst = 0.0;
  for (Parity p : {Parity::even, Parity::odd}) {
    const OperatorM m = assemble_M(profile, p);
    const OperatorK k = assemble_K(map, zg, p);
    const Vector x = profile.grid.points(p);
    for (int j = 0; j < 5; ++j) {
      const Vector psi = p == Parity::even ? even_probe(x, j) : odd_probe(x, j);
      const Vector mpsi = m.matrix * psi;
      const Vector kpsi = map.to_x(k.matrix * map.to_z(psi, p, zg), p, zg);
      worst = std::max(worst, (mpsi - kpsi).head(interior).norm() / mpsi.head(interior).norm());
    }
  }
  return worst;
}

double tail_decay_rate(const SolitonProfile& profile) {
  // Least-squares slope of log Q over x in [L/2, 7L/8].
  const Grid& g = profile.grid;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int k = 0; k < g.n; ++k) {
    const double x = profile.primary.x[k], q = profile.primary.Q[k];
    if (x < 0.5 * g.half_length || x > 0.875 * g.half_length || !(q > 0.0)) continue;
    const double y = std::log(q);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  return -(count * sxy - sx * sy) / (count * sxx - sx * sx);
}

ordered_json verdict_json(const Verdict& v) {
  ordered_json j;
  j["name"] = v.name;
  j["claim"] = v.claim;
  j["pass"] = v.pass;
  j["measured"] = v.measured;
  j["relation"] = v.relation;
  j["tolerance"] = v.tolerance;
  if (v.relation == "in") j["upper"] = v.upper;
  j["detail"] = v.detail;
  return j;
}

ordered_json verdict_list(const std::vector<Verdict>& verdicts) {
  ordered_json a = ordered_json::array();
  for (const Verdict& v : verdicts) a.push_back(verdict_json(v));
  return a;
}

ordered_json summary(const std::vector<Verdict>& verdicts) {
  int passed = 0;
  for (const Verdict& v : verdicts) passed += v.pass ? 1 : 0;
  ordered_json j;
  j["pass"] = passed == static_cast<int>(verdicts.size());
  j["total"] = verdicts.size();
  j["passed"] = passed;
  j["failed"] = static_cast<int>(verdicts.size()) - passed;
  return j;
}

// The output directory is left out so files do not depend on where they are written.
ordered_json config_json(const RunConfig& config) {
  ordered_json j = ordered_json::parse(config.to_json());
  j.erase("output_dir");
  return j;
}

ordered_json report_json(const SpectrumReport& r) {
  ordered_json j;
  j["operator"] = r.op;
  j["counts"] = {{"negative", r.counts.negative}, {"near_zero", r.counts.near_zero}, {"positive", r.counts.positive}};
  j["zero_tolerance"] = r.zero_tolerance;
  j["band_edge"] = r.band_edge;
  ordered_json s = ordered_json::object();
  for (const auto& [k, v] : r.scalars) s[k] = v;
  j["scalars"] = s;
  j["eigenvalues"] = std::vector<double>(r.eigenvalues.begin(), r.eigenvalues.end());
  j["verdicts"] = verdict_list(r.verdicts);
  return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> emit(const RunConfig& config, const std::vector<std::pair<std::string, std::string>>& files) {
  std::vector<std::string> names;
  for (const auto& [name, content] : files) {
    write_file(join_path(config.output_dir, name), content);
    names.push_back(name);
  }
  return names;
}

}  // namespace

bool all_pass(const std::vector<Verdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

Vector smooth_odd_sample(const Grid& grid, std::uint64_t seed) {
  const Vector r = pseudo_random_vector(4, seed);
  const Vector x = grid.nodes();
  Vector out = Vector::Zero(grid.n);
  for (int j = 0; j < 4; ++j) {
    const double w = 1.0 + j;
    out += r[j] * x.cwiseProduct((-(x.array().square()) / (2.0 * w * w)).exp().matrix());
  }
  return out;
}

SolitonRun run_soliton(const RunConfig& config, const Progress& progress) {
  config.validate();
  SolitonRun run;
  run.profile = stage("soliton", progress, [&] { return solve_profile(config.soliton(), config.grid()); });
  const SolitonProfile& p = run.profile;
  const Grid& g = p.grid;
  const double a = p.params.crest();
  const double qn = l2_norm(g, p.dual.Q);
  auto& v = run.verdicts;
  v.push_back(make_verdict("S.ode_residual", "Q solves the travelling-wave ODE", ode_residual(p) / qn, "<=", 1e-8,
                           "relative discrete L2 norm, interior dual nodes"));
  v.push_back(make_verdict("S.first_integral", "Q'^2 = Q^2 (c - 2 kappa - Q) / (c - Q)",
                           first_integral_residual(p) / qn, "<=", 1e-6, "relative discrete L2 norm"));
  v.push_back(make_verdict("S.crest_value", "Q(0) = c - 2 kappa", std::abs(p.crest_value - a), "<=", 1e-8));
  const double rate = tail_decay_rate(p);
  v.push_back(make_verdict("S.tail_rate", "Q decays like exp(-sqrt(1 - 2 kappa / c) |x|)",
                           std::abs(rate - p.alpha) / p.alpha, "<=", 0.02,
                           "fitted rate " + fmt(rate) + " over [L/2, 7L/8], expected " + fmt(p.alpha)));
  bool monotone = true;
  double barrier = std::numeric_limits<double>::infinity();
  for (const ProfileSamples* s : {&p.primary, &p.dual})
    for (int k = 0; k < g.n; ++k) {
      if (k > 0 && !(s->Q[k] < s->Q[k - 1]) && s->Q[k] > 0.0) monotone = false;
      barrier = std::min(barrier, p.params.c - s->Q[k]);
    }
  v.push_back(make_verdict("S.monotone_tail", "Q is strictly decreasing away from the crest", monotone ? 1.0 : 0.0,
                           "==", 1.0));
  v.push_back(make_verdict("S.barrier", "c - Q stays at or above 2 kappa", barrier, ">=",
                           2.0 * p.params.kappa - 1e-10));
  const double tail = std::abs(p.primary.Q[g.n - 1]) / a;
  v.push_back(make_verdict("domain.tail_amplitude", "the domain resolves the decay of Q", tail, "<=", 1e-8,
                           "Q(L_dom) / (c - 2 kappa); exp(-alpha L_dom) = " + fmt(std::exp(-p.alpha * g.half_length))));
  return run;
}

namespace {

// m a - b accumulated in long double. In double the product alone rounds at
// eps ||m|| ||a||, which for a fourth-order operator is near the tolerance.
Vector extended_residual(const SparseMatrix& m, const Vector& a, const Vector& b) {
  std::vector<long double> acc(static_cast<std::size_t>(b.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i) acc[static_cast<std::size_t>(i)] = -static_cast<long double>(b[i]);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      acc[static_cast<std::size_t>(it.row())] += static_cast<long double>(it.value()) * a[it.col()];
  Vector r(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) r[i] = static_cast<double>(acc[static_cast<std::size_t>(i)]);
  return r;
}

}  // namespace

double solvability_error(const OperatorL& L, const Grid& grid, int count) {
  Eigen::SparseLU<SparseMatrix> lu(L.matrix);
  if (lu.info() != Eigen::Success) throw SolverError("factorization of L failed");
  const OddCalculus ops(grid);
  double worst = 0.0;
  for (int j = 0; j < count; ++j) {
    const Vector psi = smooth_odd_sample(grid, 1000 + static_cast<std::uint64_t>(j));
    const Vector rhs = apply_N(ops, psi);
    Vector a = lu.solve(rhs);
    for (int it = 0; it < 2; ++it) a -= lu.solve(extended_residual(L.matrix, a, rhs));
    if (!a.allFinite()) throw SolverError("L a = N(psi) produced non-finite values");
    worst = std::max(worst, l2_norm(grid, extended_residual(L.matrix, a, rhs)) / l2_norm(grid, rhs));
  }
  return worst;
}

SpectrumRun run_spectrum(const RunConfig& config, const SolitonProfile& profile, const Progress& progress) {
  config.validate();
  SpectrumRun run;
  const Grid& g = profile.grid;
  auto& v = run.verdicts;

  run.M = stage("eig_M", progress, [&] { return eig_M(profile); });
  append(v, run.M.verdicts);

  stage("refinement_drift", progress, [&] {
    const int lo = std::max(8, config.n / 2), hi = 2 * config.n;
    const Vector e_lo = merged_M_eigenvalues(solve_profile(config.soliton(), config.grid(lo)));
    const Vector e_hi = merged_M_eigenvalues(solve_profile(config.soliton(), config.grid(hi)));
    const EigenCounts c_lo = count_signs(e_lo, zero_tolerance(e_lo));
    const EigenCounts c_hi = count_signs(e_hi, zero_tolerance(e_hi));
    const EigenCounts& c = run.M.counts;
    const int mismatch = std::abs(c_lo.negative - c.negative) + std::abs(c_hi.negative - c.negative) +
                         std::abs(c_lo.near_zero - c.near_zero) + std::abs(c_hi.near_zero - c.near_zero);
    const std::string sizes = "n = " + std::to_string(lo) + " and " + std::to_string(hi);
    v.push_back(make_verdict("M.counts_stable", "negative and near-zero counts of sigma(M) do not change under refinement",
                             mismatch, "==", 0.0, sizes));
    v.push_back(make_verdict("M.ground_state_drift", "the negative eigenvalue of M is converged",
                             std::abs(e_hi[0] - e_lo[0]) / std::abs(e_hi[0]), "<=", 1e-6,
                             sizes + ": " + format_double(e_lo[0]) + ", " + format_double(e_hi[0])));
  });

  stage("domain", progress, [&] {
    // Grow the domain by half at fixed h; a converged ground state does not move.
    RunConfig wide = config;
    wide.L_dom = 1.5 * config.L_dom;
    const int n_wide = config.n + config.n / 2;
    const SolitonProfile wp = solve_profile(config.soliton(), build_grid(wide.L_dom, n_wide, g.family));
    const double wide0 = symmetric_eigen(Matrix(assemble_M(wp, Parity::even).matrix), false).values[0];
    const double here0 = run.M.eigenvalues[0];
    v.push_back(make_verdict("domain.lambda0_truncation", "the truncated domain does not pollute sigma(M)",
                             std::abs(wide0 - here0) / std::abs(wide0), "<=", 1e-8,
                             "L_dom = " + fmt(config.L_dom) + " vs " + fmt(wide.L_dom) + " at fixed h; exp(-2 alpha L_dom) = " +
                                 fmt(std::exp(-2.0 * profile.alpha * config.L_dom))));
  });

  run.K = stage("eig_K", progress, [&] {
    const LiouvilleMap map(profile);
    return eig_K(map, liouville_grid(map), run.M);
  });
  append(v, run.K.verdicts);
  const double conj = stage("conjugacy", progress, [&] { return conjugacy_error(profile); });
  v.push_back(make_verdict("K.conjugacy", "M psi = (c - Q)^{-1/4} K (c - Q)^{1/4} psi under the Liouville map", conj,
                           "<=", 1e-4, "max relative residual over 5 probes per parity, interior nodes"));

  const OperatorL L = assemble_L(profile);
  run.L = stage("eig_L", progress, [&] { return eig_L_odd(L, g); });
  append(v, run.L.verdicts);
  const double solv = stage("solvability", progress, [&] { return solvability_error(L, g, 5); });
  v.push_back(make_verdict("L.solvability", "L a = N(psi) is solvable for odd psi", solv, "<=", 1e-8,
                           "max relative back-substitution error over 5 smooth odd psi"));

  run.A = stage("eig_blocks", progress, [&] {
    const int nb = std::min(config.n, 256);
    const SolitonProfile bp = nb == config.n ? profile : solve_profile(config.soliton(), config.grid(nb));
    const BlockOperator brute(bp.grid, assemble_L(bp));
    return eig_blocks(run.L, &brute);
  });
  append(v, run.A.verdicts);
  return run;
}

ResolventRun run_resolvent(const RunConfig& config, const SolitonProfile& profile, const Progress& progress,
                           const SpectrumReport* l_report) {
  config.validate();
  ResolventRun run;
  const Grid& g = profile.grid;
  const OperatorL L = assemble_L(profile);
  SpectrumReport own;
  if (l_report == nullptr) {
    own = stage("eig_L", progress, [&] { return eig_L_odd(L, g); });
    l_report = &own;
  }
  if (l_report->counts.negative != 1)
    throw StageError("resolvent", "L must have exactly one negative eigenvalue on odd functions");
  run.lambda = l_report->scalars.at("lambda");
  run.omega0 = l_report->scalars.at("omega0");
  run.resolvent = stage("resolvent", progress, [&] {
    return resolvent_profile(BlockOperator(g, L), run.omega0, config.n_range);
  });
  append(run.verdicts, run.resolvent.verdicts);
  run.auxiliary = stage("auxiliary", progress, [&] {
    return auxiliary_estimates(L, g, run.lambda, config.n_range, l_report);
  });
  append(run.verdicts, run.auxiliary.verdicts);
  return run;
}

std::vector<Verdict> reversibility_checks(const SolitonProfile& profile) {
  const Grid& g = profile.grid;
  const BlockOperator b(g, assemble_L(profile));
  const SparseMatrix a = b.sparse(), s = b.reverser();
  const SparseMatrix anti = s * a + a * s;
  double linear = 0.0;
  for (int k = 0; k < anti.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(anti, k); it; ++it) linear = std::max(linear, std::abs(it.value()));
  double nonlinear = 0.0;
  for (int j = 0; j < 10; ++j) {
    const BlockState w{smooth_odd_sample(g, 2000 + 2 * j), smooth_odd_sample(g, 2001 + 2 * j)};
    const BlockState lhs = b.nonlinearity(BlockOperator::reverse(w));
    const BlockState rhs = BlockOperator::reverse(b.nonlinearity(w));
    const double e1 = l2_norm(g, lhs.w1 + rhs.w1), e2 = l2_norm(g, lhs.w2 + rhs.w2);
    nonlinear = std::max(nonlinear, std::sqrt(e1 * e1 + e2 * e2));
  }
  return {make_verdict("R.linear", "S A + A S = 0", linear, "==", 0.0, "max entry of S A + A S"),
          make_verdict("R.nonlinear", "F(S W) = -S F(W)", nonlinear, "<=", 1e-12, "max over 10 smooth odd states")};
}

VerifyRun run_verify(const RunConfig& config, const Progress& progress) {
  config.validate();
  VerifyRun run;
  run.soliton = run_soliton(config, progress);
  const SolitonProfile& p = run.soliton.profile;
  run.spectrum = run_spectrum(config, p, progress);
  run.resolvent = run_resolvent(config, p, progress, &run.spectrum.L);
  run.reversibility = stage("reversibility", progress, [&] { return reversibility_checks(p); });
  append(run.verdicts, run.soliton.verdicts);
  append(run.verdicts, run.spectrum.verdicts);
  append(run.verdicts, run.resolvent.verdicts);
  append(run.verdicts, run.reversibility);
  return run;
}

double jacobian_fd_error(const ModalProblem& problem, const PeriodicSolution& state) {
  const Vector x = problem.pack(state);
  const Eigen::Index size = x.size();
  Vector d = pseudo_random_vector(static_cast<int>(size), 77);
  const double scale = x.head(size - 1).norm();
  d.head(size - 1) *= 1e-2 * (scale > 0.0 ? scale : 1.0) / d.head(size - 1).norm();
  d[size - 1] *= 1e-2 * std::abs(state.omega);
  const Vector jd = problem.jacobian(state) * d;
  const double eps = 1e-3;
  PeriodicSolution plus = state, minus = state;
  problem.unpack(x + eps * d, plus);
  problem.unpack(x - eps * d, minus);
  const Vector fd = (problem.pack(problem.residual(plus)) - problem.pack(problem.residual(minus))) / (2.0 * eps);
  return (fd - jd).norm() / jd.norm();
}

BranchRun run_branch(const RunConfig& config, const Progress& progress) {
  config.validate();
  BranchRun run;
  run.profile = stage("soliton", progress, [&] { return solve_profile(config.soliton(), config.grid()); });
  const Grid& g = run.profile.grid;
  const OperatorL L = assemble_L(run.profile);
  const LinearMode mode = stage("linear_mode", progress, [&] {
    try {
      return linear_mode(L, g);
    } catch (const SolverError& e) {
      throw SolverError(std::string("bifurcation data unavailable: ") + e.what());
    }
  });
  const BranchSettings bs = config.branch();
  const ModalProblem problem(L, g, mode, bs.ny);
  run.branch = stage("continuation", progress, [&] { return continue_branch(problem, bs); });
  const Branch& b = run.branch;

  if (!b.points.empty()) {
    stage("refined_guard", progress, [&] {
      const RefinedCheck check(run.profile, mode, bs.ny);
      for (const PeriodicSolution& p : b.points) run.refined.push_back(check(p));
    });
    run.jacobian_error = stage("jacobian_check", progress, [&] { return jacobian_fd_error(problem, b.points.back()); });
  }

  auto& v = run.verdicts;
  const std::size_t expected = branch_amplitudes(bs.ds, bs.s_max).size();
  v.push_back(make_verdict("B.first_point", "the first branch point converges", b.points.empty() ? 0.0 : 1.0, "==", 1.0,
                           b.points.empty() ? b.failure : std::string{}));
  v.push_back(make_verdict("B.all_points", "every requested amplitude converges", static_cast<double>(b.points.size()),
                           "==", static_cast<double>(expected), b.truncated ? b.failure : std::string{}));
  if (b.points.empty()) return run;

  int iters = 0;
  double worst = 0.0;
  for (const PeriodicSolution& p : b.points) {
    iters = std::max(iters, p.newton_iters);
    worst = std::max(worst, p.final_residual);
  }
  v.push_back(make_verdict("B.newton_iterations", "Newton converges within the iteration budget", iters, "<=",
                           bs.max_iter, "max over points"));
  v.push_back(make_verdict("B.residual", "every point meets the residual tolerance", worst, "<=", bs.tol,
                           "max smoothed residual over points"));
  v.push_back(make_verdict("B.onset_frequency", "omega(s) -> sqrt|lambda| as s -> 0",
                           std::abs(b.points.front().omega - mode.omega0), "<=", 1e-4,
                           "|omega(" + fmt(b.points.front().s) + ") - sqrt|lambda||"));
  const PeriodicSolution& last = b.points.back();
  for (const PeriodicSolution& half : b.points)
    if (b.points.size() > 1 && std::abs(half.s - 0.5 * last.s) <= 1e-9 * last.s) {
      const Vector nl = last.mode_norms(g), nh = half.mode_norms(g);
      const double ratio = (nl[0] + nl[2]) / (nh[0] + nh[2]);
      v.push_back(make_band_verdict("B.harmonic_scaling", "||a_0|| + ||a_2|| grows like s^2", ratio, 3.5, 4.5,
                                    "s = " + fmt(last.s) + " against s = " + fmt(half.s)));
      break;
    }
  v.push_back(make_verdict("B.refined_guard", "converged points are not artifacts of the grid",
                           *std::max_element(run.refined.begin(), run.refined.end()), "<=", 10.0 * bs.tol,
                           "max over points of the residual on 2n nodes and 2 N_y modes"));
  v.push_back(make_verdict("B.jacobian", "the Newton Jacobian matches central differences", run.jacobian_error, "<=",
                           1e-6, "at s = " + fmt(last.s)));
  return run;
}

std::string verdicts_json(const std::vector<Verdict>& verdicts) { return dump(verdict_list(verdicts)); }

std::vector<std::string> write_soliton(const RunConfig& config, const SolitonRun& run) {
  const SolitonProfile& p = run.profile;
  const SolitonCurve curve(p.params);
  Table t{{"x", "Q", "Qx", "Qxx"}, {}};
  const double q0 = p.crest_value;
  t.rows.push_back({0.0, q0, 0.0, curve.curvature(q0, 0.0)});
  for (int k = 0; k < p.grid.n; ++k) {
    t.rows.push_back({p.dual.x[k], p.dual.Q[k], p.dual.Qx[k], p.dual.Qxx[k]});
    t.rows.push_back({p.primary.x[k], p.primary.Q[k], p.primary.Qx[k], p.primary.Qxx[k]});
  }
  ordered_json j;
  j["tool"] = kTool;
  j["c"] = p.params.c;
  j["kappa"] = p.params.kappa;
  j["alpha"] = p.alpha;
  j["residual"] = ode_residual(p) / l2_norm(p.grid, p.dual.Q);
  j["first_integral_residual"] = first_integral_residual(p) / l2_norm(p.grid, p.dual.Q);
  j["crest_value"] = p.crest_value;
  j["summary"] = summary(run.verdicts);
  j["verdicts"] = verdict_list(run.verdicts);
  j["config"] = config_json(config);
  return emit(config, {{"profile.csv", t.to_csv()}, {"profile.json", dump(j)}});
}

std::vector<std::string> write_spectrum(const RunConfig& config, const SpectrumRun& run) {
  ordered_json j;
  j["tool"] = kTool;
  j["summary"] = summary(run.verdicts);
  j["verdicts"] = verdict_list(run.verdicts);
  j["reports"] = ordered_json::array({report_json(run.M), report_json(run.K), report_json(run.L), report_json(run.A)});
  j["config"] = config_json(config);
  return emit(config, {{"spectrum.json", dump(j)}});
}

namespace {

std::pair<std::string, std::string> resolvent_csv(const ResolventRun& run) {
  Table t{{"n", "norm_XX", "norm_XY"}, {}};
  for (const ResolventPoint& p : run.resolvent.points) t.rows.push_back({double(p.n), p.norm_XX, p.norm_XY});
  return {"resolvent.csv", t.to_csv()};
}

std::pair<std::string, std::string> auxiliary_csv(const ResolventRun& run) {
  Table t{{"n", "norm_L2_L2", "norm_L2_H2", "norm_H2_H4"}, {}};
  for (const AuxiliaryRow& r : run.auxiliary.rows) t.rows.push_back({double(r.n), r.l2_l2, r.l2_h2, r.h2_h4});
  return {"auxiliary.csv", t.to_csv()};
}

ordered_json resolvent_json(const ResolventRun& run) {
  ordered_json j;
  j["lambda"] = run.lambda;
  j["omega0"] = run.omega0;
  ordered_json pts = ordered_json::array();
  for (const ResolventPoint& p : run.resolvent.points)
    pts.push_back({{"n", p.n}, {"omega", p.omega}, {"norm_XX", p.norm_XX}, {"norm_XY", p.norm_XY},
                   {"lanczos_steps_XX", p.steps_XX}, {"lanczos_steps_XY", p.steps_XY}});
  j["points"] = pts;
  j["slope_XX"] = run.resolvent.slope_XX;
  j["ratio_XY"] = run.resolvent.ratio_XY;
  j["block_vs_direct"] = run.resolvent.block_vs_direct;
  j["divergence_near_omega0"] = run.resolvent.divergence;
  j["auxiliary_slopes"] = {{"L2_L2", run.auxiliary.slope_l2_l2},
                           {"L2_H2", run.auxiliary.slope_l2_h2},
                           {"H2_H4", run.auxiliary.slope_h2_h4}};
  j["auxiliary_spectral_check"] = run.auxiliary.spectral_check;
  return j;
}

}  // namespace

std::vector<std::string> write_resolvent(const RunConfig& config, const ResolventRun& run) {
  ordered_json j;
  j["tool"] = kTool;
  j["summary"] = summary(run.verdicts);
  j["verdicts"] = verdict_list(run.verdicts);
  j["resolvent"] = resolvent_json(run);
  j["config"] = config_json(config);
  return emit(config, {{"resolvent.json", dump(j)}, resolvent_csv(run), auxiliary_csv(run)});
}

std::vector<std::string> write_verify(const RunConfig& config, const VerifyRun& run) {
  ordered_json j;
  j["tool"] = kTool;
  j["summary"] = summary(run.verdicts);
  j["verdicts"] = verdict_list(run.verdicts);
  j["reports"] = ordered_json::array({report_json(run.spectrum.M), report_json(run.spectrum.K),
                                      report_json(run.spectrum.L), report_json(run.spectrum.A)});
  j["resolvent"] = resolvent_json(run.resolvent);
  j["config"] = config_json(config);
  return emit(config, {{"verify.json", dump(j)}, resolvent_csv(run.resolvent), auxiliary_csv(run.resolvent)});
}

std::string branch_csv(const Branch& branch, const Grid& grid) {
  Table t{{"s", "omega", "residual", "newton_iters"}, {}};
  const int modes = branch.points.empty() ? 0 : static_cast<int>(branch.points.front().modes.size());
  for (int m = 0; m < modes; ++m) t.header.push_back("norm_a" + std::to_string(m));
  for (const PeriodicSolution& p : branch.points) {
    std::vector<double> row{p.s, p.omega, p.final_residual, double(p.newton_iters)};
    const Vector nm = p.mode_norms(grid);
    row.insert(row.end(), nm.begin(), nm.end());
    t.rows.push_back(std::move(row));
  }
  return t.to_csv();
}

std::string field_csv(const FieldTable& f) {
  Table t{{"x", "y", "psi", "phi", "v"}, {}};
  const Eigen::Index nx = f.x.size();
  t.rows.reserve(static_cast<std::size_t>(nx * f.y.size()));
  for (Eigen::Index i = 0; i < f.y.size(); ++i)
    for (Eigen::Index k = 0; k < nx; ++k) {
      const Eigen::Index e = i * nx + k;
      t.rows.push_back({f.x[k], f.y[i], f.psi[e], f.phi[e], f.v[e]});
    }
  return t.to_csv();
}

std::vector<std::string> write_branch(const RunConfig& config, const BranchRun& run) {
  const Branch& b = run.branch;
  const Grid& g = run.profile.grid;
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("branch.csv", branch_csv(b, g));
  ordered_json fields = ordered_json::array();
  if (!b.points.empty()) {
    files.emplace_back("fields_first.csv", field_csv(reconstruct(b.points.front(), run.profile, config.y_samples)));
    fields.push_back({{"file", "fields_first.csv"}, {"s", b.points.front().s}});
    if (b.points.size() > 1) {
      files.emplace_back("fields_last.csv", field_csv(reconstruct(b.points.back(), run.profile, config.y_samples)));
      fields.push_back({{"file", "fields_last.csv"}, {"s", b.points.back().s}});
    }
  }
  ordered_json j;
  j["tool"] = kTool;
  j["summary"] = summary(run.verdicts);
  j["verdicts"] = verdict_list(run.verdicts);
  j["lambda"] = b.lambda;
  j["omega0"] = b.omega0;
  j["points"] = b.points.size();
  j["truncated"] = b.truncated;
  if (b.truncated) {
    j["failed_s"] = b.failed_s;
    j["failure"] = b.failure;
    j["failure_history"] = b.failure_history;
  }
  j["refined_residuals"] = run.refined;
  j["jacobian_fd_error"] = run.jacobian_error;
  j["files"] = {{"branch", "branch.csv"}, {"fields", fields}};
  j["config"] = config_json(config);
  files.emplace_back("branch_manifest.json", dump(j));
  return emit(config, files);
}

}  // namespace chkp
