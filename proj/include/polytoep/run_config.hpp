#pragma once

#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polytoep/checks.hpp"
#include "polytoep/errors.hpp"
#include "polytoep/toeplitz.hpp"

namespace polytoep {

/// Settings shared by every CLI subcommand. Box degrees given as a single
/// value are broadcast to all variables of the symbol.
struct RunConfig {
  std::vector<int> inner_box{3};
  std::vector<int> outer_box{24};
  double eps = 1e-10;
  double tol_pass = 1e-8;
  double tol_fail = 1e-2;
  double rank_tol = 1e-8;
  double model_tol = 1e-8;
  int grid_m = 64;
  int max_power = 4;
  int max_m = 20;
  std::string format = "json";
  std::string output;  // empty: standard output

  Tolerances tolerances() const { return {tol_pass, tol_fail}; }

  void validate() const {
    for (double t : {eps, tol_pass, tol_fail, rank_tol, model_tol})
      if (!(t > 0)) throw invalid_input("eps and all tolerances must be positive");
    if (grid_m < 2) throw invalid_input("grid_m must be at least 2");
    if (max_power < 1) throw invalid_input("max_power must be at least 1");
    if (max_m < 1) throw invalid_input("max_m must be at least 1");
    if (format != "json" && format != "csv") throw invalid_input("format must be json or csv");
    if (inner_box.empty() || outer_box.empty()) throw invalid_input("boxes must be nonempty");
    for (int v : inner_box)
      if (v < 0) throw invalid_input("box degrees must be nonnegative");
    for (int v : outer_box)
      if (v < 0) throw invalid_input("box degrees must be nonnegative");
    if (inner_box.size() == outer_box.size() || inner_box.size() == 1 || outer_box.size() == 1) {
      const std::size_t n = std::max(inner_box.size(), outer_box.size());
      if (!resolve(inner_box, n).inside(resolve(outer_box, n)))
        throw invalid_input("inner box must lie inside the outer box");
    }
  }

  static DegreeBox resolve(const std::vector<int>& degrees, std::size_t n) {
    if (degrees.size() == 1) return DegreeBox::cube(n, degrees.front());
    if (degrees.size() != n)
      throw invalid_input("box has " + std::to_string(degrees.size()) + " degrees but the symbol has " +
                          std::to_string(n) + " variables");
    return DegreeBox(MultiIndex(degrees));
  }

  DegreeBox inner(std::size_t n) const { return resolve(inner_box, n); }
  DegreeBox outer(std::size_t n) const {
    DegreeBox D = resolve(outer_box, n);
    if (!inner(n).inside(D)) throw invalid_input("inner box must lie inside the outer box");
    return D;
  }
};

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"inner_box", c.inner_box}, {"outer_box", c.outer_box}, {"eps", c.eps},
          {"tol_pass", c.tol_pass},   {"tol_fail", c.tol_fail},   {"rank_tol", c.rank_tol},
          {"model_tol", c.model_tol}, {"grid_m", c.grid_m},       {"max_power", c.max_power},
          {"max_m", c.max_m},         {"format", c.format}};
}

namespace detail {
inline std::vector<int> box_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return {j.get<int>()};
  if (!j.is_array()) throw invalid_input("box must be an integer or an array of integers");
  std::vector<int> out;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw invalid_input("box entries must be integers");
    out.push_back(x.get<int>());
  }
  return out;
}
}  // namespace detail

/// Overlays the keys present in `j` onto `base`; unknown keys are rejected.
inline RunConfig merge_config(RunConfig base, const nlohmann::json& j) {
  if (!j.is_object()) throw invalid_input("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "inner_box") base.inner_box = detail::box_from_json(v);
      else if (key == "outer_box") base.outer_box = detail::box_from_json(v);
      else if (key == "eps") base.eps = v.get<double>();
      else if (key == "tol_pass") base.tol_pass = v.get<double>();
      else if (key == "tol_fail") base.tol_fail = v.get<double>();
      else if (key == "rank_tol") base.rank_tol = v.get<double>();
      else if (key == "model_tol") base.model_tol = v.get<double>();
      else if (key == "grid_m") base.grid_m = v.get<int>();
      else if (key == "max_power") base.max_power = v.get<int>();
      else if (key == "max_m") base.max_m = v.get<int>();
      else if (key == "format") base.format = v.get<std::string>();
      else if (key == "output") base.output = v.get<std::string>();
      else throw invalid_input("unknown config key \"" + key + "\"");
    } catch (const nlohmann::json::exception& e) {
      throw invalid_input("config key \"" + key + "\": " + e.what());
    }
  }
  return base;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw invalid_input(path + ": " + e.what());
  }
}

/// Defaults, then the file named by POLYTOEP_CONFIG, then `explicit_path`.
inline RunConfig load_config(const std::string& explicit_path) {
  RunConfig c;
  if (const char* env = std::getenv("POLYTOEP_CONFIG"); env && *env) c = merge_config(c, read_json_file(env));
  if (!explicit_path.empty()) c = merge_config(c, read_json_file(explicit_path));
  return c;
}

}  // namespace polytoep
