#pragma once

#include "chkp/branch.hpp"

#include <string>
#include <vector>

namespace chkp {

/// Every run parameter. Runs are fully deterministic; there is no seed.
/// {lo, lo + 1, ..., hi}.
std::vector<int> integer_range(int lo, int hi);

struct RunConfig {
  double c = 3.0;
  double kappa = 1.0;
  double L_dom = 40.0;
  int n = 1024;
  std::string family = "fd6";
  int N_y = 8;
  double ds = 1e-3;
  double s_max = 0.1;
  double tol = 1e-10;
  int max_iter = 10;
  std::vector<int> n_range = integer_range(4, 64);  // every n in [4, 64]
  int y_samples = 32;  // field tables: stations per period
  std::string output_dir = "chkp_out";

  /// Throws ParameterError naming the offending field.
  void validate() const;

  SolitonParams soliton() const { return {c, kappa}; }
  Grid grid() const;
  Grid grid(int nodes) const;
  BranchSettings branch() const;

  /// Pretty-printed JSON with every field.
  std::string to_json() const;
};

/// Overlays the keys present in `text` (a JSON object) on `base`. Unknown
/// keys and wrongly typed values raise ParameterError.
RunConfig merge_json(const RunConfig& base, const std::string& text);

RunConfig load_config_file(const RunConfig& base, const std::string& path);

/// Environment variable naming the output root.
inline constexpr const char* kOutputDirEnv = "CHKP_OUTPUT_DIR";

/// Replaces output_dir with the environment value if it is set and non-empty.
RunConfig apply_environment(RunConfig config);

}  // namespace chkp
