// Command-line front end: symbol validation, compressions, checks,
// factorization and Halmos-Wallen decomposition. Exit codes: 0 success/PASS,
// 1 FAIL, 2 invalid input, 3 INCONCLUSIVE or numeric budget exceeded.

#include <openssl/evp.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "polytoep/polytoep.hpp"

using namespace polytoep;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFail = 1, kInvalid = 2, kInconclusive = 3 };

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::PASS: return kOk;
    case Verdict::FAIL: return kFail;
    case Verdict::INCONCLUSIVE: return kInconclusive;
  }
  return kInconclusive;
}

// Batch severity: invalid input > inconclusive > fail > pass.
int worse(int a, int b) {
  auto rank = [](int c) { return c == kInvalid ? 3 : c == kInconclusive ? 2 : c == kFail ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw numeric_failure("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string content_hash(const json& canonical) { return sha256_hex(canonical.dump()); }

struct Overrides {
  std::string config_path;
  std::optional<std::vector<int>> inner, outer;
  std::optional<double> eps, tol_pass, tol_fail, rank_tol, model_tol;
  std::optional<int> grid_m, max_power, max_m;
  std::optional<std::string> format, output;
};

RunConfig build_config(const Overrides& o) {
  RunConfig c = load_config(o.config_path);
  if (o.inner) c.inner_box = *o.inner;
  if (o.outer) c.outer_box = *o.outer;
  if (o.eps) c.eps = *o.eps;
  if (o.tol_pass) c.tol_pass = *o.tol_pass;
  if (o.tol_fail) c.tol_fail = *o.tol_fail;
  if (o.rank_tol) c.rank_tol = *o.rank_tol;
  if (o.model_tol) c.model_tol = *o.model_tol;
  if (o.grid_m) c.grid_m = *o.grid_m;
  if (o.max_power) c.max_power = *o.max_power;
  if (o.max_m) c.max_m = *o.max_m;
  if (o.format) c.format = *o.format;
  if (o.output) c.output = *o.output;
  c.validate();
  return c;
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) throw invalid_input("cannot write " + cfg.output);
  out << text;
}

void emit_json(const RunConfig& cfg, const json& j) { emit(cfg, j.dump(2) + "\n"); }

std::vector<int> parse_degrees(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw invalid_input("bad box degree '" + item + "'");
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw invalid_input("bad box degree '" + item + "'");
    }
  }
  if (out.empty()) throw invalid_input("empty box specification");
  return out;
}

json inputs_json(const RunConfig& cfg, const std::string& hash, std::size_t n) {
  json j = {{"input_sha256", hash}, {"config", to_json(cfg)}};
  j["resolved_inner_box"] = cfg.inner(n).degrees().values();
  j["resolved_outer_box"] = cfg.outer(n).degrees().values();
  return j;
}

json aggregate(const std::string& name, const std::vector<CheckReport>& reports, const json& inputs, int& code) {
  Verdict v = Verdict::PASS;
  json arr = json::array();
  for (const auto& r : reports) {
    if (r.verdict == Verdict::FAIL) v = Verdict::FAIL;
    else if (r.verdict == Verdict::INCONCLUSIVE && v != Verdict::FAIL) v = Verdict::INCONCLUSIVE;
    arr.push_back(io::report_json(r));
  }
  code = exit_for(v);
  return {{"check", name}, {"verdict", to_string(v)}, {"reports", arr}, {"inputs", inputs}};
}

// One check on one file; returns (report JSON, exit code).
std::pair<json, int> run_check(const std::string& kind, const std::string& path, const RunConfig& cfg) {
  const json doc = read_json_file(path);
  const Tolerances tol = cfg.tolerances();
  int code = kOk;
  if (kind == "commutation" || kind == "final-projection") {
    if (!doc.is_object() || !doc.contains("phi1") || !doc.contains("phi2"))
      throw invalid_input(path + ": expected {\"phi1\": symbol, \"phi2\": symbol}");
    const SymbolExpr p1 = io::parse_symbol(doc["phi1"]), p2 = io::parse_symbol(doc["phi2"]);
    const json canonical = {{"phi1", io::symbol_json(p1)}, {"phi2", io::symbol_json(p2)}};
    const std::size_t n = p1.vars();
    const json inputs = inputs_json(cfg, content_hash(canonical), n);
    if (kind == "commutation") {
      auto [a, b] = check_commutation(p1, p2, cfg.inner(n), cfg.outer(n), cfg.eps, tol);
      json out = aggregate("commutation", {a, b}, inputs, code);
      return {out, code};
    }
    const CheckReport r = check_final_projection(p1, p2, cfg.inner(n), cfg.outer(n), cfg.eps, tol);
    return {io::report_json(r, inputs), exit_for(r.verdict)};
  }
  if (kind == "doubly-commuting") {
    if (!doc.is_object() || !doc.contains("generators") || !doc["generators"].is_array() || doc["generators"].empty())
      throw invalid_input(path + ": expected {\"generators\": [[..], ..], \"box\": .., \"guard\": g}");
    const std::size_t n = doc["generators"][0].size();
    if (n == 0) throw invalid_input("generators must have at least one component");
    std::vector<MultiIndex> gens;
    for (const auto& g : doc["generators"]) gens.push_back(io::parse_index(g, n, "generator"));
    const DegreeBox box = doc.contains("box") ? RunConfig::resolve(detail::box_from_json(doc["box"]), n) : cfg.inner(n);
    const int guard = doc.value("guard", 1);
    json canonical = {{"generators", json::array()}, {"box", box.degrees().values()}, {"guard", guard}};
    for (const auto& g : gens) canonical["generators"].push_back(g.values());
    const CheckReport r = check_doubly_commuting(gens, box, guard);
    json inputs = {{"input_sha256", content_hash(canonical)}, {"config", to_json(cfg)}, {"box", box.degrees().values()}};
    return {io::report_json(r, inputs), exit_for(r.verdict)};
  }
  const SymbolExpr phi = io::parse_symbol(doc);
  const std::size_t n = phi.vars();
  const json inputs = inputs_json(cfg, content_hash(io::symbol_json(phi)), n);
  if (kind == "unimodular") {
    const CheckReport r = check_unimodular(phi, cfg.grid_m, tol);
    return {io::report_json(r, inputs), exit_for(r.verdict)};
  }
  if (kind == "partial-isometry") {
    const CheckReport r = check_partial_isometry(phi, cfg.inner(n), cfg.outer(n), cfg.eps, tol);
    return {io::report_json(r, inputs), exit_for(r.verdict)};
  }
  if (kind == "power-pi") {
    const auto rs = check_power_partial_isometry(phi, cfg.max_power, cfg.inner(n), cfg.outer(n), cfg.eps, tol);
    json out = aggregate("power_partial_isometry", rs, inputs, code);
    return {out, code};
  }
  if (kind == "hyponormal") {
    const CheckReport r = check_hyponormal(phi, cfg.inner(n), cfg.outer(n), cfg.eps, tol);
    return {io::report_json(r, inputs), exit_for(r.verdict)};
  }
  if (kind == "range-invariance") {
    if (!is_exact(phi)) throw invalid_input("range-invariance needs an exact monomial symbol");
    const CheckReport r = check_range_invariance(to_laurent(phi), cfg.outer(n));
    return {io::report_json(r, inputs), exit_for(r.verdict)};
  }
  throw invalid_input("unknown check kind '" + kind + "'");
}

int error_code(const std::exception_ptr& ep, std::string& message) {
  try {
    std::rethrow_exception(ep);
  } catch (const invalid_input& e) {
    message = e.what();
    return kInvalid;
  } catch (const nlohmann::json::exception& e) {
    message = e.what();
    return kInvalid;
  } catch (const not_partial_isometry& e) {
    message = e.what();
    return kFail;
  } catch (const budget_exceeded& e) {
    message = e.what();
    return kInconclusive;
  } catch (const numeric_failure& e) {
    message = e.what();
    return kInconclusive;
  } catch (const std::exception& e) {
    message = e.what();
    return kInconclusive;
  }
}

int cmd_check(const std::string& kind, const std::vector<std::string>& files, int jobs, const RunConfig& cfg) {
  std::vector<json> results(files.size());
  std::vector<int> codes(files.size(), kOk);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next++) < files.size();) {
      try {
        auto [j, c] = run_check(kind, files[i], cfg);
        results[i] = std::move(j);
        codes[i] = c;
      } catch (...) {
        std::string msg;
        codes[i] = error_code(std::current_exception(), msg);
        results[i] = {{"file", files[i]}, {"error", msg}, {"exit_code", codes[i]}};
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(files.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kOk;
  for (std::size_t i = 0; i < files.size(); ++i) {
    code = worse(code, codes[i]);
    if (results[i].contains("error")) std::cerr << files[i] << ": " << results[i]["error"].get<std::string>() << "\n";
  }
  emit_json(cfg, files.size() == 1 ? results.front() : json(results));
  return code;
}

std::string csv_row(const std::string& box, double value, double gap, double leak) {
  return box + "," + io::format_double(value) + "," + io::format_double(gap) + "," + io::format_double(leak) + "\n";
}

std::string box_label(const DegreeBox& b) {
  std::string s;
  for (std::size_t i = 0; i < b.vars(); ++i) s += (i ? "x" : "") + std::to_string(b.degrees()[i]);
  return s;
}

LaurentPoly parse_vector_arg(const std::string& arg, std::size_t n) {
  if (arg.empty()) return LaurentPoly::constant(n, 1);
  json j;
  const std::string trimmed = arg.substr(arg.find_first_not_of(" \t"));
  if (!trimmed.empty() && trimmed.front() == '{') {
    try {
      j = json::parse(trimmed);
    } catch (const json::parse_error& e) {
      throw invalid_input(std::string("--vector: ") + e.what());
    }
  } else {
    j = read_json_file(arg);
  }
  if (j.contains("laurent")) j = j["laurent"];
  return io::parse_laurent(j, n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toeplitz operators on the polydisc: compressions, checks and structure"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides ov;
  std::string inner_s, outer_s;
  app.add_option("--config", ov.config_path, "JSON RunConfig file (also POLYTOEP_CONFIG)");
  app.add_option("--box,--inner-box", inner_s, "inner box degrees, e.g. 3 or 3,3");
  app.add_option("--outer-box", outer_s, "outer box degrees, e.g. 24 or 24,24");
  app.add_option("--eps", ov.eps, "coefficient accuracy");
  app.add_option("--tol-pass", ov.tol_pass);
  app.add_option("--tol-fail", ov.tol_fail);
  app.add_option("--rank-tol", ov.rank_tol);
  app.add_option("--model-tol", ov.model_tol);
  app.add_option("--grid", ov.grid_m, "torus grid points per variable");
  app.add_option("--max-power", ov.max_power);
  app.add_option("--max-m", ov.max_m);
  app.add_option("--format", ov.format, "json or csv");
  app.add_option("-o,--output", ov.output, "write the report to this file");

  auto* symbol = app.add_subcommand("symbol", "symbol utilities");
  symbol->require_subcommand(1);
  std::string sym_file;
  auto* validate = symbol->add_subcommand("validate", "parse and echo the canonical symbol");
  validate->add_option("file", sym_file)->required();
  auto* variables = symbol->add_subcommand("variables", "analytic / co-analytic dependence per variable");
  variables->add_option("file", sym_file)->required();

  std::string file;
  auto* matrix = app.add_subcommand("matrix", "compression on a degree box");
  matrix->add_option("file", file)->required();

  std::string kind;
  std::vector<std::string> files;
  int jobs = 1;
  auto* check = app.add_subcommand("check", "run a checker");
  check->add_option("kind", kind)
      ->required()
      ->check(CLI::IsMember({"unimodular", "partial-isometry", "power-pi", "hyponormal", "range-invariance",
                             "commutation", "final-projection", "doubly-commuting"}));
  check->add_option("files", files)->required();
  check->add_option("--jobs", jobs, "files processed concurrently")->check(CLI::PositiveNumber);

  std::string sweep_s;
  auto* norm = app.add_subcommand("norm", "compression norms over a box sweep");
  norm->add_option("file", file)->required();
  norm->add_option("--box-sweep", sweep_s, "comma-separated cube degrees")->required();

  std::string vector_s;
  auto* decay = app.add_subcommand("decay", "norms of T^{*m} f for analytic symbols");
  decay->add_option("file", file)->required();
  decay->add_option("--vector", vector_s, "Laurent polynomial f as JSON {\"terms\": [...]} or a file (default 1)");

  auto* factor = app.add_subcommand("factorize", "inner factorization phi = scalar conj(phi1) phi2");
  factor->add_option("file", file)->required();

  bool with_basis = false;
  auto* decompose = app.add_subcommand("decompose", "Halmos-Wallen decomposition of a matrix or a symbol compression");
  decompose->add_option("file", file)->required();
  decompose->add_flag("--basis", with_basis, "include the change-of-basis matrix");

  auto* classify = app.add_subcommand("classify", "shift / co-shift / truncated-shift classification");
  classify->add_option("file", file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (!inner_s.empty()) ov.inner = parse_degrees(inner_s);
    if (!outer_s.empty()) ov.outer = parse_degrees(outer_s);
    const RunConfig cfg = build_config(ov);

    if (*validate || *variables) {
      const SymbolExpr phi = io::parse_symbol(read_json_file(sym_file));
      const json canonical = io::symbol_json(phi);
      if (*validate) {
        emit_json(cfg, {{"valid", true}, {"vars", phi.vars()}, {"exact", is_exact(phi)}, {"symbol", canonical},
                        {"input_sha256", content_hash(canonical)}});
      } else {
        json out = io::variables_json(classify_variables(phi, cfg.eps));
        out["input_sha256"] = content_hash(canonical);
        emit_json(cfg, out);
      }
      return kOk;
    }
    if (*matrix) {
      const SymbolExpr phi = io::parse_symbol(read_json_file(file));
      emit_json(cfg, io::compression_json(compression(phi, cfg.inner(phi.vars()), cfg.eps)));
      return kOk;
    }
    if (*check) return cmd_check(kind, files, jobs, cfg);
    if (*norm) {
      const SymbolExpr phi = io::parse_symbol(read_json_file(file));
      std::vector<DegreeBox> sweep;
      for (int d : parse_degrees(sweep_s)) sweep.push_back(DegreeBox::cube(phi.vars(), d));
      const NormEstimate est = estimate_norm(phi, sweep, cfg.grid_m, cfg.eps);
      if (cfg.format == "csv") {
        std::string text = "box,value,gap,leakage_bound\n";
        for (const auto& r : est.rows) text += csv_row(box_label(r.box), r.value, r.gap, r.leakage_bound);
        emit(cfg, text);
      } else {
        json rows = json::array();
        for (const auto& r : est.rows)
          rows.push_back({{"box", r.box.degrees().values()}, {"value", r.value}, {"gap", r.gap},
                          {"leakage_bound", r.leakage_bound}});
        emit_json(cfg, {{"rows", rows},
                        {"sup_lower", est.sup.lower},
                        {"sup_upper", est.sup.upper},
                        {"monotone", est.monotone},
                        {"within_upper", est.within_upper},
                        {"attained", est.attained},
                        {"input_sha256", content_hash(io::symbol_json(phi))},
                        {"config", to_json(cfg)}});
      }
      return est.monotone && est.within_upper ? kOk : kFail;
    }
    if (*decay) {
      const SymbolExpr phi = io::parse_symbol(read_json_file(file));
      const LaurentPoly f = parse_vector_arg(vector_s, phi.vars());
      const DecayResult d = shift_decay(phi, f, cfg.max_m, cfg.eps);
      if (cfg.format == "csv") {
        // box = m, value = norm, gap = decrease from m - 1, leakage_bound = error bound.
        std::string text = "box,value,gap,leakage_bound\n";
        double prev = std::sqrt(f.norm2_sq().get_d());
        for (std::size_t m = 0; m < d.norms.size(); ++m) {
          text += csv_row(std::to_string(m + 1), d.norms[m], prev - d.norms[m], d.errors[m]);
          prev = d.norms[m];
        }
        emit(cfg, text);
      } else {
        emit_json(cfg, {{"norms", d.norms},
                        {"errors", d.errors},
                        {"exact", d.exact},
                        {"nonincreasing", d.nonincreasing},
                        {"vector", io::laurent_json(f)},
                        {"input_sha256", content_hash(io::symbol_json(phi))},
                        {"config", to_json(cfg)}});
      }
      return kOk;
    }
    if (*factor) {
      const SymbolExpr phi = io::parse_symbol(read_json_file(file));
      json out = io::factorization_json(factorize(phi, cfg.eps, cfg.grid_m));
      out["input_sha256"] = content_hash(io::symbol_json(phi));
      emit_json(cfg, out);
      return kOk;
    }
    if (*decompose) {
      const json doc = read_json_file(file);
      ComplexMatrix v;
      json inputs = {{"config", to_json(cfg)}};
      if (doc.contains("rows")) {
        v = io::parse_matrix(doc);
        inputs["input_sha256"] = content_hash(io::matrix_json(v));
      } else {
        const SymbolExpr phi = io::parse_symbol(doc);
        const CompressionMatrix c = compression(phi, cfg.inner(phi.vars()), cfg.eps);
        v = c.M;
        inputs["input_sha256"] = content_hash(io::symbol_json(phi));
        inputs["box"] = c.box.degrees().values();
        inputs["entry_err"] = c.entry_err;
      }
      json out = io::hw_json(hw_decompose(v, cfg.rank_tol, cfg.model_tol), with_basis);
      out["inputs"] = inputs;
      emit_json(cfg, out);
      return kOk;
    }
    if (*classify) {
      const SymbolExpr phi = io::parse_symbol(read_json_file(file));
      const std::size_t n = phi.vars();
      ClassifyParams p{cfg.inner(n), cfg.outer(n), cfg.eps, cfg.tolerances(), cfg.rank_tol, cfg.model_tol,
                       cfg.grid_m,   cfg.max_m};
      const Classification c = classify_operator(phi, p);
      json out = io::classification_json(c);
      out["inputs"] = inputs_json(cfg, content_hash(io::symbol_json(phi)), n);
      emit_json(cfg, out);
      switch (c.kind) {
        case OperatorClass::NOT_PARTIAL_ISOMETRY: return kFail;
        case OperatorClass::INCONCLUSIVE: return kInconclusive;
        default: return kOk;
      }
    }
  } catch (...) {
    std::string msg;
    const int code = error_code(std::current_exception(), msg);
    std::cerr << "error: " << msg << "\n";
    return code;
  }
  return kInvalid;
}
