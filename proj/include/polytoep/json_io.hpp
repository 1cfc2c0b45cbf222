#pragma once

#include <charconv>
#include <complex>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "polytoep/checks.hpp"
#include "polytoep/errors.hpp"
#include "polytoep/gaussian_rational.hpp"
#include "polytoep/laurent.hpp"
#include "polytoep/linalg.hpp"
#include "polytoep/structure.hpp"
#include "polytoep/symbol.hpp"
#include "polytoep/toeplitz.hpp"

namespace polytoep::io {

using json = nlohmann::json;

// ---- scalars ---------------------------------------------------------------

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double x) {
  if (x == 0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string format_complex(std::complex<double> z) {
  if (z.imag() == 0) return format_double(z.real());
  std::string im = format_double(std::abs(z.imag()));
  if (im == "1") im.clear();
  const char sign = z.imag() < 0 ? '-' : '+';
  if (z.real() == 0) return (sign == '-' ? "-" : "") + im + "i";
  return format_double(z.real()) + sign + im + "i";
}

namespace detail {

// [-]x[(+|-)y]i forms with decimal floats; whole-string match required.
inline std::complex<double> parse_float_complex(std::string_view s) {
  const std::string original(s);
  auto fail = [&]() -> std::complex<double> { throw invalid_input("malformed numeric literal '" + original + "'"); };
  auto read = [&](std::string_view t, double& out) -> std::size_t {
    // from_chars rejects a leading '+'; sign handled by the caller.
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc{}) return 0;
    return static_cast<std::size_t>(ptr - t.data());
  };
  if (s.empty()) return fail();
  double first = 0;
  std::size_t used = read(s, first);
  if (used == 0) {
    if (s == "i") return {0, 1};
    if (s == "-i") return {0, -1};
    return fail();
  }
  s.remove_prefix(used);
  if (s.empty()) return {first, 0};
  if (s == "i") return {0, first};
  const char sign = s.front();
  if (sign != '+' && sign != '-') return fail();
  s.remove_prefix(1);
  if (s.empty() || s.back() != 'i') return fail();
  s.remove_suffix(1);
  double second = 1;
  if (!s.empty()) {
    if (s.front() == '-' || s.front() == '+') return fail();
    if (read(s, second) != s.size()) return fail();
  }
  return {first, sign == '-' ? -second : second};
}

}  // namespace detail

/// Exact literal when the grammar allows it, float complex otherwise.
inline Scalar parse_scalar(const json& j) {
  if (j.is_number_integer()) return GaussianRational(j.get<long>());
  if (j.is_number_float()) return std::complex<double>(j.get<double>(), 0.0);
  if (!j.is_string()) throw invalid_input("scalar must be a string literal or a number");
  const std::string s = j.get<std::string>();
  if (s.find_first_of(".eE") == std::string::npos) return GaussianRational::parse(s);
  return detail::parse_float_complex(s);
}

inline std::string format_scalar(const Scalar& s) {
  if (const auto* g = std::get_if<GaussianRational>(&s)) return g->to_string();
  return format_complex(std::get<std::complex<double>>(s));
}

inline json complex_pair(std::complex<double> z) { return json::array({z.real() == 0 ? 0.0 : z.real(), z.imag() == 0 ? 0.0 : z.imag()}); }

inline json index_json(const MultiIndex& k) { return json(k.values()); }

inline MultiIndex parse_index(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) throw invalid_input(std::string(what) + " must be an array of " + std::to_string(n) + " integers");
  std::vector<int> v;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw invalid_input(std::string(what) + " entries must be integers");
    v.push_back(x.get<int>());
  }
  return MultiIndex(std::move(v));
}

// ---- Laurent polynomials -----------------------------------------------------

inline LaurentPoly parse_laurent(const json& j, std::size_t n) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    throw invalid_input("laurent node needs a \"terms\" array");
  LaurentPoly::Terms terms;
  for (const auto& t : j["terms"]) {
    if (!t.is_object() || !t.contains("k") || !t.contains("c")) throw invalid_input("laurent term needs \"k\" and \"c\"");
    const MultiIndex k = parse_index(t["k"], n, "term exponent");
    if (!t["c"].is_string() && !t["c"].is_number_integer())
      throw invalid_input("laurent coefficients must be exact Gaussian-rational literals");
    const GaussianRational c = t["c"].is_string() ? GaussianRational::parse(t["c"].get<std::string>())
                                                  : GaussianRational(t["c"].get<long>());
    terms[k] += c;
  }
  return LaurentPoly(n, std::move(terms));
}

/// Terms in canonical (lexicographic) order.
inline json laurent_json(const LaurentPoly& p) {
  json terms = json::array();
  for (const auto& [k, c] : p.terms()) terms.push_back({{"k", index_json(k)}, {"c", c.to_string()}});
  return {{"terms", terms}};
}

// ---- symbols -------------------------------------------------------------------

inline SymbolExpr parse_expr(const json& e, std::size_t n) {
  if (!e.is_object() || e.size() != 1) throw invalid_input("expression node must be an object with exactly one key");
  const auto& [key, val] = *e.items().begin();
  if (key == "const") return sym::constant(n, parse_scalar(val));
  if (key == "monomial") return sym::monomial(parse_index(val, n, "monomial"));
  if (key == "blaschke") {
    if (!val.is_object() || !val.contains("var") || !val.contains("zero"))
      throw invalid_input("blaschke node needs \"var\" and \"zero\"");
    if (!val["var"].is_number_integer()) throw invalid_input("blaschke var must be an integer");
    const long var = val["var"].get<long>();
    if (var < 1 || static_cast<std::size_t>(var) > n) throw invalid_input("blaschke var out of range 1.." + std::to_string(n));
    return sym::blaschke(n, static_cast<std::size_t>(var - 1), parse_scalar(val["zero"]));
  }
  if (key == "conj") return sym::conj(parse_expr(val, n));
  if (key == "product" || key == "sum") {
    if (!val.is_array()) throw invalid_input(key + " node needs an array");
    std::vector<SymbolExpr> xs;
    for (const auto& x : val) xs.push_back(parse_expr(x, n));
    return key == "product" ? sym::product(std::move(xs)) : sym::sum(std::move(xs));
  }
  if (key == "laurent") return sym::laurent(parse_laurent(val, n));
  throw invalid_input("unknown expression node \"" + key + "\"");
}

inline SymbolExpr parse_symbol(const json& j) {
  if (!j.is_object() || !j.contains("vars") || !j.contains("expr")) throw invalid_input("symbol needs \"vars\" and \"expr\"");
  if (!j["vars"].is_number_integer() || j["vars"].get<long>() < 1) throw invalid_input("\"vars\" must be a positive integer");
  return parse_expr(j["expr"], static_cast<std::size_t>(j["vars"].get<long>()));
}

inline json expr_json(const SymbolExpr& s) {
  return std::visit(overloaded{
                        [](const node::Constant& c) -> json { return {{"const", format_scalar(c.value)}}; },
                        [](const node::Monomial& m) -> json { return {{"monomial", index_json(m.k)}}; },
                        [](const node::Blaschke& b) -> json {
                          return {{"blaschke", {{"var", b.factor.var + 1}, {"zero", format_scalar(b.factor.zero)}}}};
                        },
                        [](const node::Conj& c) -> json { return {{"conj", expr_json(c.arg)}}; },
                        [](const node::Product& p) -> json {
                          json a = json::array();
                          for (const auto& f : p.factors) a.push_back(expr_json(f));
                          return {{"product", a}};
                        },
                        [](const node::Sum& p) -> json {
                          json a = json::array();
                          for (const auto& t : p.terms) a.push_back(expr_json(t));
                          return {{"sum", a}};
                        },
                        [](const node::Laurent& l) -> json { return {{"laurent", laurent_json(l.poly)}}; },
                    },
                    s.node().v);
}

inline json symbol_json(const SymbolExpr& s) { return {{"vars", s.vars()}, {"expr", expr_json(s)}}; }

// ---- matrices -------------------------------------------------------------------

inline json matrix_json(const ComplexMatrix& m) {
  json entries = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back(complex_pair(m(r, c)));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline ComplexMatrix parse_matrix(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
    throw invalid_input("matrix needs \"rows\", \"cols\" and \"entries\"");
  const long rows = j["rows"].get<long>(), cols = j["cols"].get<long>();
  if (rows < 1 || cols < 1) throw invalid_input("matrix dimensions must be positive");
  const json& e = j["entries"];
  if (!e.is_array() || e.size() != static_cast<std::size_t>(rows * cols))
    throw invalid_input("matrix needs rows * cols entries");
  ComplexMatrix m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) {
      const json& z = e[static_cast<std::size_t>(r * cols + c)];
      if (z.is_number()) {
        m(r, c) = z.get<double>();
      } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
        m(r, c) = {z[0].get<double>(), z[1].get<double>()};
      } else {
        throw invalid_input("matrix entries must be [re, im] pairs");
      }
    }
  if (!m.allFinite()) throw invalid_input("matrix has non-finite entries");
  return m;
}

inline json compression_json(const CompressionMatrix& c) {
  json j = matrix_json(c.M);
  j["box"] = index_json(c.box.degrees());
  j["entry_err"] = c.entry_err;
  return j;
}

// ---- reports ----------------------------------------------------------------------

inline json witness_json(const std::optional<Witness>& w) {
  if (!w) return nullptr;
  json value;
  if (w->kind == Witness::Kind::monomial) {
    value = index_json(w->index);
  } else {
    value = json::array();
    for (auto z : w->vector) value.push_back(complex_pair(z));
  }
  return {{"kind", to_string(w->kind)}, {"value", value}};
}

inline json report_json(const CheckReport& r, const json& inputs = json::object()) {
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  return {{"check", r.check},
          {"verdict", to_string(r.verdict)},
          {"exact", r.exact},
          {"residual", r.residual},
          {"leakage_bound", r.leakage_bound},
          {"thresholds", {{"pass", r.threshold_pass}, {"fail", r.threshold_fail}}},
          {"witness", witness_json(r.witness)},
          {"details", r.details},
          {"metrics", metrics},
          {"inputs", inputs}};
}

inline json hw_json(const HWDecomposition& hw, bool with_basis = false) {
  json blocks = json::array();
  for (const auto& [p, m] : hw.blocks) blocks.push_back({p, m});
  json j = {{"unitary_dim", hw.unitary_dim},
            {"blocks", blocks},
            {"model_residual", hw.model_residual},
            {"orthonormality_error", hw.orthonormality_error},
            {"rank_tol", hw.rank_tol},
            {"model_tol", hw.model_tol},
            {"note", hw.note}};
  if (with_basis) j["basis_change"] = matrix_json(hw.basis_change);
  return j;
}

inline json factorization_json(const FactorizationResult& f) {
  return {{"phi1", symbol_json(f.phi1)},
          {"phi2", symbol_json(f.phi2)},
          {"scalar", format_scalar(f.scalar)},
          {"method", f.method},
          {"reconstruction_error", f.reconstruction_error}};
}

inline json classification_json(const Classification& c) {
  json j = {{"class", to_string(c.kind)}, {"note", c.note}, {"partial_isometry", report_json(c.partial_isometry)}};
  if (c.factorization) j["factorization"] = factorization_json(*c.factorization);
  if (c.decomposition) j["decomposition"] = hw_json(*c.decomposition);
  if (c.decay) j["decay"] = c.decay->norms;
  return j;
}

inline json variables_json(const VariableClassification& vc) {
  json tags = json::array();
  for (std::size_t i = 0; i < vc.tags.size(); ++i) {
    json w = json::object();
    if (vc.positive_witness[i]) w["positive"] = index_json(*vc.positive_witness[i]);
    if (vc.negative_witness[i]) w["negative"] = index_json(*vc.negative_witness[i]);
    tags.push_back({{"var", i + 1}, {"tag", to_string(vc.tags[i])}, {"witness", w}});
  }
  return {{"exact", vc.exact}, {"threshold", vc.threshold}, {"variables", tags}};
}

}  // namespace polytoep::io
