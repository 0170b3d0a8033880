// chkp: command-line front end for the soliton, spectrum, resolvent, branch
// and verify runs.

#include "chkp/config.hpp"
#include "chkp/io.hpp"
#include "chkp/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverError = 3;
constexpr int kVerdictFailure = 4;

struct Overrides {
  std::string config_file;
  std::optional<double> c, kappa, L_dom, ds, s_max, tol;
  std::optional<int> n, N_y, max_iter, y_samples;
  std::optional<std::string> family, output_dir;
  std::optional<std::vector<int>> n_range;
};

void add_options(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_file, "JSON config file (see print-defaults)");
  app.add_option("--c", o.c, "wave speed");
  app.add_option("--kappa", o.kappa, "dispersion parameter");
  app.add_option("--L_dom", o.L_dom, "half-length of the domain");
  app.add_option("--n", o.n, "grid nodes per half-line");
  app.add_option("--family", o.family, "difference family: fd4, fd6, fd8");
  app.add_option("--N_y", o.N_y, "Fourier modes in y");
  app.add_option("--ds", o.ds, "amplitude step");
  app.add_option("--s_max", o.s_max, "final amplitude");
  app.add_option("--tol", o.tol, "Newton residual tolerance");
  app.add_option("--max_iter", o.max_iter, "Newton iteration cap");
  app.add_option("--n_range", o.n_range, "resolvent Fourier indices")->delimiter(',');
  app.add_option("--y_samples", o.y_samples, "field-table stations per period");
  app.add_option("--output_dir", o.output_dir, "output directory");
}

// defaults < config file < environment < flags
chkp::RunConfig resolve(const Overrides& o) {
  chkp::RunConfig cfg;
  if (!o.config_file.empty()) cfg = chkp::load_config_file(cfg, o.config_file);
  cfg = chkp::apply_environment(cfg);
  auto set = [](auto& field, const auto& value) {
    if (value) field = *value;
  };
  set(cfg.c, o.c);
  set(cfg.kappa, o.kappa);
  set(cfg.L_dom, o.L_dom);
  set(cfg.n, o.n);
  set(cfg.family, o.family);
  set(cfg.N_y, o.N_y);
  set(cfg.ds, o.ds);
  set(cfg.s_max, o.s_max);
  set(cfg.tol, o.tol);
  set(cfg.max_iter, o.max_iter);
  set(cfg.n_range, o.n_range);
  set(cfg.y_samples, o.y_samples);
  set(cfg.output_dir, o.output_dir);
  cfg.validate();
  return cfg;
}

void progress(const std::string& line) { std::cerr << "[chkp] " << line << '\n'; }

int report(const std::vector<chkp::Verdict>& verdicts) {
  int failed = 0;
  for (const chkp::Verdict& v : verdicts) {
    char bound[64];
    if (v.relation == "in") std::snprintf(bound, sizeof bound, "in [%g, %g]", v.tolerance, v.upper);
    else std::snprintf(bound, sizeof bound, "%s %g", v.relation.c_str(), v.tolerance);
    std::printf("%s  %-28s measured %-12.6g %-14s %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.measured, bound,
                v.detail.c_str());
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu verdicts pass\n", static_cast<int>(verdicts.size()) - failed, verdicts.size());
  return failed == 0 ? kOk : kVerdictFailure;
}

void list_files(const chkp::RunConfig& cfg, const std::vector<std::string>& files) {
  for (const std::string& f : files) std::cerr << "[chkp] wrote " << chkp::join_path(cfg.output_dir, f) << '\n';
}

int cmd_soliton(const chkp::RunConfig& cfg) {
  const chkp::SolitonRun run = chkp::run_soliton(cfg, progress);
  list_files(cfg, chkp::write_soliton(cfg, run));
  return report(run.verdicts);
}

int cmd_spectrum(const chkp::RunConfig& cfg) {
  const chkp::SolitonRun s = chkp::run_soliton(cfg, progress);
  const chkp::SpectrumRun run = chkp::run_spectrum(cfg, s.profile, progress);
  list_files(cfg, chkp::write_spectrum(cfg, run));
  return report(run.verdicts);
}

int cmd_resolvent(const chkp::RunConfig& cfg) {
  const chkp::SolitonRun s = chkp::run_soliton(cfg, progress);
  const chkp::ResolventRun run = chkp::run_resolvent(cfg, s.profile, progress);
  list_files(cfg, chkp::write_resolvent(cfg, run));
  std::printf("%6s  %-22s %-22s\n", "n", "norm_XX", "norm_XY");
  for (const chkp::ResolventPoint& p : run.resolvent.points) std::printf("%6d  %-22.15g %-22.15g\n", p.n, p.norm_XX, p.norm_XY);
  return report(run.verdicts);
}

int cmd_verify(const chkp::RunConfig& cfg) {
  const chkp::VerifyRun run = chkp::run_verify(cfg, progress);
  list_files(cfg, chkp::write_verify(cfg, run));
  return report(run.verdicts);
}

int cmd_branch(const chkp::RunConfig& cfg) {
  const chkp::BranchRun run = chkp::run_branch(cfg, progress);
  list_files(cfg, chkp::write_branch(cfg, run));
  std::printf("%-12s %-22s %s\n", "s", "omega", "iters");
  for (const chkp::PeriodicSolution& p : run.branch.points)
    std::printf("%-12.6g %-22.17g %d\n", p.s, p.omega, p.newton_iters);
  report(run.verdicts);
  if (run.branch.truncated) std::cerr << "[chkp] branch stopped at s = " << run.branch.failed_s << ": " << run.branch.failure << '\n';
  return run.first_converged() ? kOk : kSolverError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Line solitary waves: profile, spectral verdicts and the bifurcating branch"};
  app.require_subcommand(1);
  Overrides o;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const chkp::RunConfig&);
  };
  const Command commands[] = {
      {"soliton", "solve the solitary-wave profile", cmd_soliton},
      {"spectrum", "spectra of M, K, L and the block operator", cmd_spectrum},
      {"resolvent", "resolvent norms along the imaginary axis", cmd_resolvent},
      {"branch", "continue the bifurcating branch in amplitude", cmd_branch},
      {"verify", "run every verdict and write one report", cmd_verify},
  };
  int (*chosen)(const chkp::RunConfig&) = nullptr;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_options(*sub, o);
    sub->callback([&chosen, run = c.run] { chosen = run; });
  }
  CLI::App* defaults = app.add_subcommand("print-defaults", "print the effective config as JSON");
  add_options(*defaults, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  chkp::RunConfig cfg;
  try {
    cfg = resolve(o);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }
  if (defaults->parsed()) {
    std::cout << cfg.to_json();
    return kOk;
  }

  try {
    return chosen(cfg);
  } catch (const chkp::ParameterError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const chkp::StageError& e) {
    std::cerr << "stage '" << e.stage() << "' failed: " << e.what() << '\n';
    if (!e.history().empty()) {
      std::cerr << "residual history:";
      for (double r : e.history()) std::cerr << ' ' << chkp::format_double(r);
      std::cerr << '\n';
    }
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverError;
  }
}
