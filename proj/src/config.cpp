#include "chkp/config.hpp"

#include "chkp/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace chkp {

using nlohmann::ordered_json;

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

template <typename T>
void read(const ordered_json& j, const char* key, T& out) {
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

std::vector<int> integer_range(int lo, int hi) {
  std::vector<int> out;
  for (int k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

void RunConfig::validate() const {
  require(std::isfinite(c) && std::isfinite(kappa), "c and kappa must be finite");
  require(kappa > 0.0, "kappa must be positive");
  require(c > 2.0 * kappa, "c > 2 kappa is required for a smooth solitary wave (got c = " +
                               std::to_string(c) + ", kappa = " + std::to_string(kappa) + ")");
  require(std::isfinite(L_dom) && L_dom > 0.0, "L_dom must be positive");
  require(n >= 8, "n must be at least 8");
  parse_family(family);
  require(N_y >= 1, "N_y must be at least 1");
  require(ds > 0.0 && std::isfinite(ds), "ds must be positive");
  require(s_max > 0.0 && std::isfinite(s_max), "s_max must be positive");
  require(tol > 0.0 && std::isfinite(tol), "tol must be positive");
  require(max_iter >= 0, "max_iter must be non-negative");
  require(!n_range.empty(), "n_range must not be empty");
  for (int k : n_range) require(std::abs(k) > 1, "n_range entries must satisfy |n| > 1");
  require(y_samples >= 2, "y_samples must be at least 2");
  require(!output_dir.empty(), "output_dir must not be empty");
}

Grid RunConfig::grid() const { return grid(n); }

Grid RunConfig::grid(int nodes) const { return build_grid(L_dom, nodes, parse_family(family)); }

BranchSettings RunConfig::branch() const {
  BranchSettings b;
  b.ny = N_y;
  b.ds = ds;
  b.s_max = s_max;
  b.tol = tol;
  b.max_iter = max_iter;
  return b;
}

std::string RunConfig::to_json() const {
  ordered_json j;
  j["c"] = c;
  j["kappa"] = kappa;
  j["L_dom"] = L_dom;
  j["n"] = n;
  j["family"] = family;
  j["N_y"] = N_y;
  j["ds"] = ds;
  j["s_max"] = s_max;
  j["tol"] = tol;
  j["max_iter"] = max_iter;
  j["n_range"] = n_range;
  j["y_samples"] = y_samples;
  j["output_dir"] = output_dir;
  return j.dump(2) + "\n";
}

RunConfig merge_json(const RunConfig& base, const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), "config must be a JSON object");
  RunConfig out = base;
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key == "c") read(j, "c", out.c);
    else if (key == "kappa") read(j, "kappa", out.kappa);
    else if (key == "L_dom") read(j, "L_dom", out.L_dom);
    else if (key == "n") read(j, "n", out.n);
    else if (key == "family") read(j, "family", out.family);
    else if (key == "N_y") read(j, "N_y", out.N_y);
    else if (key == "ds") read(j, "ds", out.ds);
    else if (key == "s_max") read(j, "s_max", out.s_max);
    else if (key == "tol") read(j, "tol", out.tol);
    else if (key == "max_iter") read(j, "max_iter", out.max_iter);
    else if (key == "n_range") read(j, "n_range", out.n_range);
    else if (key == "y_samples") read(j, "y_samples", out.y_samples);
    else if (key == "output_dir") read(j, "output_dir", out.output_dir);
    else throw ParameterError("unknown config key '" + key + "'");
  }
  return out;
}

RunConfig load_config_file(const RunConfig& base, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return merge_json(base, text.str());
}

RunConfig apply_environment(RunConfig config) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') config.output_dir = env;
  return config;
}

}  // namespace chkp
