#pragma once

#include "chkp/operators.hpp"

#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace chkp {

/// One named claim with its measured value and acceptance threshold.
struct Verdict {
  std::string name;
  std::string claim;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  double upper = std::numeric_limits<double>::quiet_NaN();  // for relation "in": [tolerance, upper]
  std::string relation;  // how measured is compared with tolerance: "<=", ">=", "==", ">", "in"
  std::string detail;
};

Verdict make_verdict(std::string name, std::string claim, double measured, std::string relation,
                     double tolerance, std::string detail = {});
Verdict make_band_verdict(std::string name, std::string claim, double measured, double lo, double hi,
                          std::string detail = {});

struct EigenCounts {
  int negative = 0;
  int near_zero = 0;
  int positive = 0;
};

struct SpectrumReport {
  std::string op;
  Vector eigenvalues;                   // ascending
  std::vector<Parity> parities;         // per eigenvalue when both parities are merged
  Matrix vectors;                       // selected eigenvectors (columns)
  std::vector<std::string> vector_labels;
  EigenCounts counts;
  double zero_tolerance = 0.0;
  double band_edge = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, double> scalars;  // named measurements (lambda, omega0, gap, ...)
  std::vector<Verdict> verdicts;

  bool passed() const;
  const Verdict* find(const std::string& name) const;
};

/// |nu| <= 1e-6 max(1, |nu_min|): relative to the bound-state scale rather than
/// the operator norm, which grows like h^{-2} (M) or h^{-4} (L).
double zero_tolerance(const Vector& ascending_eigenvalues);

EigenCounts count_signs(const Vector& values, double tol);

/// Sign changes of a sampled function, ignoring entries below rel * max|v|.
int sign_changes(const Vector& v, double rel = 1e-8);

/// Sign changes of the full-line extension of a half-line function of given parity.
int full_line_sign_changes(const Vector& v, Parity parity, double rel = 1e-8);

/// Both parity blocks of M, merged. Checks the single negative (even,
/// nodeless) eigenvalue, the single near-zero eigenvalue with eigenvector Q',
/// and positivity of the rest.
SpectrumReport eig_M(const SolitonProfile& profile);

/// Both parity blocks of K on z_grid. Band edge from delocalized
/// eigenvectors, oscillation counts of the bound states, and agreement of
/// bound states with the given M spectrum.
SpectrumReport eig_K(const LiouvilleMap& map, const Grid& z_grid, const SpectrumReport& m_report);

/// Fraction of the discrete L2 mass of v on nodes with |x| <= cutoff.
double mass_fraction(const Grid& grid, const Vector& v, Stagger s, double cutoff);

/// L on odd functions: single negative eigenvalue lambda, no near-zero
/// eigenvalue, positive gap. Stores lambda, omega0 = sqrt|lambda| and the
/// unit-norm eigenvector of lambda as vector column 0 (first significant entry positive).
SpectrumReport eig_L_odd(const OperatorL& L, const Grid& grid);

/// Spectrum of the block operator mapped from sigma(L) (mu = +-sqrt(nu)).
/// If `brute_force` is given, its dense eigenvalues are compared with the
/// map of its own L spectrum.
SpectrumReport eig_blocks(const SpectrumReport& l_report, const BlockOperator* brute_force = nullptr);

/// Eigenvalues of a block operator by a dense nonsymmetric solve (balanced).
std::vector<std::complex<double>> block_eigenvalues_dense(const BlockOperator& b);

struct ResolventPoint {
  int n = 0;
  double omega = 0.0;
  double norm_XX = 0.0;
  double norm_XY = 0.0;
  int steps_XX = 0;
  int steps_XY = 0;
};

struct ResolventProfile {
  std::vector<ResolventPoint> points;  // sorted by n
  double slope_XX = 0.0;
  double ratio_XY = 0.0;
  double block_vs_direct = 0.0;  // max relative difference over the test inputs
  std::vector<double> divergence;  // norm at omega0 (1 + 10^-k), k = 2..6
  std::vector<Verdict> verdicts;
};

/// ||(A - i n omega0)^{-1}|| in the X -> X and X -> Y norms for n in n_range,
/// where X = L2 x H2 and Y = H2 x H4 (Hilbertian product norms).
ResolventProfile resolvent_profile(const BlockOperator& b, double omega0, const std::vector<int>& n_range);

struct AuxiliaryRow {
  int n = 0;
  double l2_l2 = 0.0;
  double l2_h2 = 0.0;
  double h2_h4 = 0.0;
};

struct AuxiliaryEstimates {
  std::vector<AuxiliaryRow> rows;
  double slope_l2_l2 = 0.0;
  double slope_l2_h2 = 0.0;
  double slope_h2_h4 = 0.0;
  double spectral_check = 0.0;  // relative difference against 1/dist at the first n
  std::vector<Verdict> verdicts;
};

/// ||(L - n^2 lambda)^{-1}|| in L2->L2, L2->H2 and H2->H4 for n in n_range.
AuxiliaryEstimates auxiliary_estimates(const OperatorL& L, const Grid& grid, double lambda,
                                       const std::vector<int>& n_range, const SpectrumReport* l_report = nullptr);

/// Deterministic pseudo-random vector in [-1, 1) (portable across platforms).
Vector pseudo_random_vector(int size, std::uint64_t seed);

}  // namespace chkp
