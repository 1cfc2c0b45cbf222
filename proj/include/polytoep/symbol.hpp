#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "polytoep/errors.hpp"
#include "polytoep/gaussian_rational.hpp"
#include "polytoep/laurent.hpp"

namespace polytoep {

/// A complex constant, exact when possible.
using Scalar = std::variant<GaussianRational, std::complex<double>>;

inline bool is_exact(const Scalar& s) { return std::holds_alternative<GaussianRational>(s); }

inline std::complex<double> to_complex(const Scalar& s) {
  return std::visit(
      [](const auto& v) -> std::complex<double> {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, GaussianRational>) {
          return v.to_complex();
        } else {
          return v;
        }
      },
      s);
}

inline Scalar conj(const Scalar& s) {
  if (const auto* g = std::get_if<GaussianRational>(&s)) return g->conj();
  return std::conj(std::get<std::complex<double>>(s));
}

inline Scalar operator*(const Scalar& a, const Scalar& b) {
  if (is_exact(a) && is_exact(b)) return std::get<GaussianRational>(a) * std::get<GaussianRational>(b);
  return to_complex(a) * to_complex(b);
}

/// One-variable Blaschke factor (z_var - a) / (1 - conj(a) z_var), |a| < 1.
/// `var` is zero-based.
struct BlaschkeFactor {
  std::size_t var = 0;
  Scalar zero = GaussianRational{};

  double modulus() const { return std::abs(to_complex(zero)); }
};

struct SymbolNode;

/// Immutable structured symbol on the n-torus. Cheap to copy (shared node).
class SymbolExpr {
 public:
  SymbolExpr(std::size_t n, std::shared_ptr<const SymbolNode> node) : n_(n), node_(std::move(node)) {}

  std::size_t vars() const { return n_; }
  const SymbolNode& node() const { return *node_; }

 private:
  std::size_t n_;
  std::shared_ptr<const SymbolNode> node_;
};

namespace node {
struct Constant {
  Scalar value;
};
struct Monomial {
  MultiIndex k;
};
struct Blaschke {
  BlaschkeFactor factor;
};
struct Conj {
  SymbolExpr arg;
};
struct Product {
  std::vector<SymbolExpr> factors;
};
struct Sum {
  std::vector<SymbolExpr> terms;
};
struct Laurent {
  LaurentPoly poly;
};
}  // namespace node

struct SymbolNode {
  std::variant<node::Constant, node::Monomial, node::Blaschke, node::Conj, node::Product, node::Sum, node::Laurent> v;
};

namespace detail {
template <class T>
SymbolExpr make_symbol(std::size_t n, T payload) {
  if (n == 0) throw invalid_input("symbol needs at least one variable");
  return SymbolExpr(n, std::make_shared<const SymbolNode>(SymbolNode{std::move(payload)}));
}

inline void require_children(std::size_t n, const std::vector<SymbolExpr>& xs, const char* what) {
  if (xs.empty()) throw invalid_input(std::string(what) + " must be nonempty");
  for (const auto& x : xs)
    if (x.vars() != n) throw invalid_input(std::string(what) + " operands have different variable counts");
}
}  // namespace detail

namespace sym {

inline SymbolExpr constant(std::size_t n, Scalar c) { return detail::make_symbol(n, node::Constant{std::move(c)}); }

inline SymbolExpr monomial(MultiIndex k) {
  const std::size_t n = k.size();
  return detail::make_symbol(n, node::Monomial{std::move(k)});
}

/// `var` is zero-based.
inline SymbolExpr blaschke(std::size_t n, std::size_t var, Scalar zero) {
  if (var >= n) throw invalid_input("Blaschke variable index out of range");
  if (const auto* g = std::get_if<GaussianRational>(&zero)) {
    if (g->norm() >= 1) throw invalid_input("Blaschke zero must satisfy |a| < 1");
  } else {
    const auto a = std::get<std::complex<double>>(zero);
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || std::abs(a) >= 1.0)
      throw invalid_input("Blaschke zero must satisfy |a| < 1");
  }
  return detail::make_symbol(n, node::Blaschke{BlaschkeFactor{var, std::move(zero)}});
}

inline SymbolExpr conj(SymbolExpr s) {
  const std::size_t n = s.vars();
  return detail::make_symbol(n, node::Conj{std::move(s)});
}

inline SymbolExpr product(std::vector<SymbolExpr> fs) {
  if (fs.empty()) throw invalid_input("product must be nonempty");
  const std::size_t n = fs.front().vars();
  detail::require_children(n, fs, "product");
  return detail::make_symbol(n, node::Product{std::move(fs)});
}

inline SymbolExpr sum(std::vector<SymbolExpr> ts) {
  if (ts.empty()) throw invalid_input("sum must be nonempty");
  const std::size_t n = ts.front().vars();
  detail::require_children(n, ts, "sum");
  return detail::make_symbol(n, node::Sum{std::move(ts)});
}

inline SymbolExpr laurent(LaurentPoly p) {
  const std::size_t n = p.vars();
  return detail::make_symbol(n, node::Laurent{std::move(p)});
}

}  // namespace sym

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

/// True iff the expression has no Blaschke node and no float constant.
inline bool is_exact(const SymbolExpr& s) {
  return std::visit(overloaded{
                        [](const node::Constant& c) { return is_exact(c.value); },
                        [](const node::Monomial&) { return true; },
                        [](const node::Blaschke&) { return false; },
                        [](const node::Conj& c) { return is_exact(c.arg); },
                        [](const node::Product& p) {
                          for (const auto& f : p.factors)
                            if (!is_exact(f)) return false;
                          return true;
                        },
                        [](const node::Sum& p) {
                          for (const auto& f : p.terms)
                            if (!is_exact(f)) return false;
                          return true;
                        },
                        [](const node::Laurent&) { return true; },
                    },
                    s.node().v);
}

/// Normalizes an exact symbol to its Laurent polynomial.
inline LaurentPoly to_laurent(const SymbolExpr& s) {
  const std::size_t n = s.vars();
  return std::visit(overloaded{
                        [&](const node::Constant& c) -> LaurentPoly {
                          if (!is_exact(c.value)) throw invalid_input("float constant on the exact path");
                          return LaurentPoly::constant(n, std::get<GaussianRational>(c.value));
                        },
                        [&](const node::Monomial& m) -> LaurentPoly { return LaurentPoly::monomial(m.k); },
                        [&](const node::Blaschke&) -> LaurentPoly {
                          throw invalid_input("Blaschke factor has no exact Laurent form");
                        },
                        [&](const node::Conj& c) -> LaurentPoly { return conj_torus(to_laurent(c.arg)); },
                        [&](const node::Product& p) -> LaurentPoly {
                          LaurentPoly acc = to_laurent(p.factors.front());
                          for (std::size_t i = 1; i < p.factors.size(); ++i) acc = acc * to_laurent(p.factors[i]);
                          return acc;
                        },
                        [&](const node::Sum& p) -> LaurentPoly {
                          LaurentPoly acc(n);
                          for (const auto& t : p.terms) acc = acc + to_laurent(t);
                          return acc;
                        },
                        [&](const node::Laurent& l) -> LaurentPoly { return l.poly; },
                    },
                    s.node().v);
}

namespace detail {
inline std::complex<double> blaschke_value(const BlaschkeFactor& b, std::complex<double> z) {
  const std::complex<double> a = to_complex(b.zero);
  return (z - a) / (1.0 - std::conj(a) * z);
}
}  // namespace detail

/// Pointwise value on the torus.
inline std::complex<double> evaluate(const SymbolExpr& s, std::span<const std::complex<double>> w) {
  detail::require_unimodular_point(w, s.vars());
  return std::visit(overloaded{
                        [&](const node::Constant& c) { return to_complex(c.value); },
                        [&](const node::Monomial& m) {
                          std::complex<double> r(1.0, 0.0);
                          for (std::size_t i = 0; i < m.k.size(); ++i)
                            if (m.k[i] != 0) r *= detail::ipow(w[i], m.k[i]);
                          return r;
                        },
                        [&](const node::Blaschke& b) { return detail::blaschke_value(b.factor, w[b.factor.var]); },
                        [&](const node::Conj& c) { return std::conj(evaluate(c.arg, w)); },
                        [&](const node::Product& p) {
                          std::complex<double> r(1.0, 0.0);
                          for (const auto& f : p.factors) r *= evaluate(f, w);
                          return r;
                        },
                        [&](const node::Sum& p) {
                          std::complex<double> r(0.0, 0.0);
                          for (const auto& t : p.terms) r += evaluate(t, w);
                          return r;
                        },
                        [&](const node::Laurent& l) { return evaluate(l.poly, w); },
                    },
                    s.node().v);
}

/// Structural a priori bounds: `sup` >= sup |phi| on the torus and
/// `lipschitz[i]` >= sup |d phi / d theta_i|.
struct SymbolBounds {
  double sup = 0;
  std::vector<double> lipschitz;
};

inline SymbolBounds structural_bounds(const SymbolExpr& s) {
  const std::size_t n = s.vars();
  return std::visit(overloaded{
                        [&](const node::Constant& c) {
                          return SymbolBounds{std::abs(to_complex(c.value)), std::vector<double>(n, 0.0)};
                        },
                        [&](const node::Monomial& m) {
                          SymbolBounds b{1.0, std::vector<double>(n, 0.0)};
                          for (std::size_t i = 0; i < n; ++i) b.lipschitz[i] = std::abs(m.k[i]);
                          return b;
                        },
                        [&](const node::Blaschke& bl) {
                          // |b'| on the circle is (1-|a|^2)/|1-conj(a)z|^2 <= (1+|a|)/(1-|a|).
                          const double r = bl.factor.modulus();
                          SymbolBounds b{1.0, std::vector<double>(n, 0.0)};
                          b.lipschitz[bl.factor.var] = (1.0 + r) / (1.0 - r);
                          return b;
                        },
                        [&](const node::Conj& c) { return structural_bounds(c.arg); },
                        [&](const node::Product& p) {
                          SymbolBounds acc{1.0, std::vector<double>(n, 0.0)};
                          for (const auto& f : p.factors) {
                            SymbolBounds fb = structural_bounds(f);
                            for (std::size_t i = 0; i < n; ++i)
                              acc.lipschitz[i] = acc.lipschitz[i] * fb.sup + acc.sup * fb.lipschitz[i];
                            acc.sup *= fb.sup;
                          }
                          return acc;
                        },
                        [&](const node::Sum& p) {
                          SymbolBounds acc{0.0, std::vector<double>(n, 0.0)};
                          for (const auto& t : p.terms) {
                            SymbolBounds tb = structural_bounds(t);
                            acc.sup += tb.sup;
                            for (std::size_t i = 0; i < n; ++i) acc.lipschitz[i] += tb.lipschitz[i];
                          }
                          return acc;
                        },
                        [&](const node::Laurent& l) {
                          SymbolBounds b{0.0, std::vector<double>(n, 0.0)};
                          for (const auto& [k, c] : l.poly.terms()) {
                            const double mag = std::abs(c.to_complex());
                            b.sup += mag;
                            for (std::size_t i = 0; i < n; ++i) b.lipschitz[i] += mag * std::abs(k[i]);
                          }
                          return b;
                        },
                    },
                    s.node().v);
}

/// Variables (zero-based) that appear syntactically in the expression.
inline std::set<std::size_t> syntactic_vars(const SymbolExpr& s) {
  std::set<std::size_t> out;
  auto add_index = [&](const MultiIndex& k) {
    for (std::size_t i = 0; i < k.size(); ++i)
      if (k[i] != 0) out.insert(i);
  };
  std::visit(overloaded{
                 [&](const node::Constant&) {},
                 [&](const node::Monomial& m) { add_index(m.k); },
                 [&](const node::Blaschke& b) { out.insert(b.factor.var); },
                 [&](const node::Conj& c) { out.merge(syntactic_vars(c.arg)); },
                 [&](const node::Product& p) {
                   for (const auto& f : p.factors) out.merge(syntactic_vars(f));
                 },
                 [&](const node::Sum& p) {
                   for (const auto& t : p.terms) out.merge(syntactic_vars(t));
                 },
                 [&](const node::Laurent& l) {
                   for (const auto& [k, c] : l.poly.terms()) add_index(k);
                 },
             },
             s.node().v);
  return out;
}

/// Number of nodes in the expression tree.
inline std::size_t node_count(const SymbolExpr& s) {
  return std::visit(overloaded{
                        [](const node::Conj& c) -> std::size_t { return 1 + node_count(c.arg); },
                        [](const node::Product& p) -> std::size_t {
                          std::size_t k = 1;
                          for (const auto& f : p.factors) k += node_count(f);
                          return k;
                        },
                        [](const node::Sum& p) -> std::size_t {
                          std::size_t k = 1;
                          for (const auto& t : p.terms) k += node_count(t);
                          return k;
                        },
                        [](const auto&) -> std::size_t { return 1; },
                    },
                    s.node().v);
}

}  // namespace polytoep
