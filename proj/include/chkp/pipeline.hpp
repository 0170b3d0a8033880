#pragma once

// Batch runs behind the command-line subcommands. Each run returns its
// measurements and verdicts; the write_* functions emit the files.

#include "chkp/config.hpp"
#include "chkp/error.hpp"
#include "chkp/spectra.hpp"

#include <functional>
#include <string>
#include <vector>

namespace chkp {

/// A run stage failed; what() starts with the stage name.
class StageError : public SolverError {
 public:
  StageError(std::string stage, const std::string& what, std::vector<double> history = {})
      : SolverError(stage + ": " + what, std::move(history)), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Receives one line per finished stage (name and wall time). Not part of
/// any output file.
using Progress = std::function<void(const std::string&)>;

bool all_pass(const std::vector<Verdict>& verdicts);

struct SolitonRun {
  SolitonProfile profile;
  std::vector<Verdict> verdicts;  // residuals, crest value, tail rate, domain tail
};

SolitonRun run_soliton(const RunConfig& config, const Progress& progress = {});

struct SpectrumRun {
  SpectrumReport M, K, L, A;
  std::vector<Verdict> verdicts;  // everything above plus conjugacy, drift, domain, solvability
};

SpectrumRun run_spectrum(const RunConfig& config, const SolitonProfile& profile, const Progress& progress = {});

struct ResolventRun {
  double lambda = 0.0, omega0 = 0.0;
  ResolventProfile resolvent;
  AuxiliaryEstimates auxiliary;
  std::vector<Verdict> verdicts;
};

/// `l_report` reuses an eig_L_odd result for the same profile.
ResolventRun run_resolvent(const RunConfig& config, const SolitonProfile& profile, const Progress& progress = {},
                           const SpectrumReport* l_report = nullptr);

struct VerifyRun {
  SolitonRun soliton;
  SpectrumRun spectrum;
  ResolventRun resolvent;
  std::vector<Verdict> reversibility;
  std::vector<Verdict> verdicts;  // all of the above, in stage order
};

VerifyRun run_verify(const RunConfig& config, const Progress& progress = {});

/// S A + A S = 0 entrywise and N(S W) + S N(W) = 0 on 10 deterministic states.
std::vector<Verdict> reversibility_checks(const SolitonProfile& profile);

/// Max relative residual |L a - N(psi)| / |N(psi)| over `count` deterministic
/// smooth odd psi, after two refinement steps with long double residuals.
double solvability_error(const OperatorL& L, const Grid& grid, int count);

/// Relative Frobenius-type difference of the Jacobian against central
/// differences along a fixed direction at `state`.
double jacobian_fd_error(const ModalProblem& problem, const PeriodicSolution& state);

/// Smooth odd test function: sum_j r_j x exp(-x^2 / (2 (1 + j)^2)), j = 0..3,
/// with r from pseudo_random_vector(4, seed).
Vector smooth_odd_sample(const Grid& grid, std::uint64_t seed);

struct BranchRun {
  SolitonProfile profile;
  Branch branch;
  std::vector<double> refined;  // refined-grid residual of every converged point
  double jacobian_error = 0.0;  // finite-difference check at the last point
  std::vector<Verdict> verdicts;
  bool first_converged() const { return !branch.points.empty(); }
};

BranchRun run_branch(const RunConfig& config, const Progress& progress = {});

/// Output files, relative to config.output_dir. Each write_* returns the
/// names it wrote.
std::vector<std::string> write_soliton(const RunConfig& config, const SolitonRun& run);
std::vector<std::string> write_spectrum(const RunConfig& config, const SpectrumRun& run);
std::vector<std::string> write_resolvent(const RunConfig& config, const ResolventRun& run);
std::vector<std::string> write_verify(const RunConfig& config, const VerifyRun& run);
std::vector<std::string> write_branch(const RunConfig& config, const BranchRun& run);

/// JSON array of {name, claim, pass, measured, relation, tolerance[, upper], detail}.
std::string verdicts_json(const std::vector<Verdict>& verdicts);
std::string branch_csv(const Branch& branch, const Grid& grid);
std::string field_csv(const FieldTable& table);

}  // namespace chkp
