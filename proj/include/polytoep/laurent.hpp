#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdlib>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polytoep/errors.hpp"
#include "polytoep/gaussian_rational.hpp"

namespace polytoep {

/// Exponent vector k in Z^n. Ordered lexicographically with the first
/// variable most significant.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t n) : k_(n, 0) {}
  explicit MultiIndex(std::vector<int> k) : k_(std::move(k)) {}
  MultiIndex(std::initializer_list<int> k) : k_(k) {}

  static MultiIndex unit(std::size_t n, std::size_t i) {
    MultiIndex e(n);
    e.k_.at(i) = 1;
    return e;
  }
  static MultiIndex filled(std::size_t n, int value) { return MultiIndex(std::vector<int>(n, value)); }

  std::size_t size() const { return k_.size(); }
  int operator[](std::size_t i) const { return k_[i]; }
  int& operator[](std::size_t i) { return k_[i]; }
  auto begin() const { return k_.begin(); }
  auto end() const { return k_.end(); }
  const std::vector<int>& values() const { return k_; }

  bool nonnegative() const {
    return std::all_of(k_.begin(), k_.end(), [](int v) { return v >= 0; });
  }
  bool is_zero() const {
    return std::all_of(k_.begin(), k_.end(), [](int v) { return v == 0; });
  }
  long abs_sum() const {
    long s = 0;
    for (int v : k_) s += std::abs(v);
    return s;
  }

  MultiIndex operator-() const {
    MultiIndex r(*this);
    for (int& v : r.k_) v = -v;
    return r;
  }
  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    check_same(a, b);
    MultiIndex r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r.k_[i] += b.k_[i];
    return r;
  }
  friend MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) { return a + (-b); }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) { return a.k_ <=> b.k_; }

  /// Componentwise a <= b.
  friend bool dominated_by(const MultiIndex& a, const MultiIndex& b) {
    check_same(a, b);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a.k_[i] > b.k_[i]) return false;
    return true;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < k_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(k_[i]);
    }
    return s + ")";
  }

 private:
  static void check_same(const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size()) throw invalid_input("multi-index length mismatch");
  }

  std::vector<int> k_;
};

/// Finitely supported Fourier series on the n-torus with Gaussian-rational
/// coefficients. No zero coefficient is ever stored; the zero polynomial has
/// an empty term map.
class LaurentPoly {
 public:
  using Terms = std::map<MultiIndex, GaussianRational>;

  explicit LaurentPoly(std::size_t n) : n_(n) {
    if (n == 0) throw invalid_input("Laurent polynomial needs at least one variable");
  }
  LaurentPoly(std::size_t n, Terms terms) : LaurentPoly(n) {
    for (auto& [k, c] : terms) {
      if (k.size() != n) throw invalid_input("term " + k.to_string() + " has wrong length");
      if (!c.is_zero()) terms_.emplace(k, std::move(c));
    }
  }

  static LaurentPoly constant(std::size_t n, const GaussianRational& c) {
    return LaurentPoly(n, Terms{{MultiIndex(n), c}});
  }
  static LaurentPoly monomial(const MultiIndex& k, const GaussianRational& c = 1) {
    return LaurentPoly(k.size(), Terms{{k, c}});
  }

  std::size_t vars() const { return n_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  GaussianRational coeff(const MultiIndex& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? GaussianRational{} : it->second;
  }

  /// Componentwise (min, max) exponents; std::nullopt for the empty support.
  std::optional<std::pair<MultiIndex, MultiIndex>> exponent_bounds() const {
    if (terms_.empty()) return std::nullopt;
    MultiIndex lo = terms_.begin()->first, hi = lo;
    for (const auto& [k, c] : terms_) {
      for (std::size_t i = 0; i < n_; ++i) {
        lo[i] = std::min(lo[i], k[i]);
        hi[i] = std::max(hi[i], k[i]);
      }
    }
    return std::make_pair(lo, hi);
  }

  /// Exact squared l2 norm of the coefficient sequence.
  mpq_class norm2_sq() const {
    mpq_class s = 0;
    for (const auto& [k, c] : terms_) s += c.norm();
    return s;
  }

  /// l1 norm of the coefficients in floating point.
  double l1_norm() const {
    double s = 0;
    for (const auto& [k, c] : terms_) s += std::abs(c.to_complex());
    return s;
  }

  bool is_analytic() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.nonnegative(); });
  }

  friend bool operator==(const LaurentPoly& a, const LaurentPoly& b) {
    return a.n_ == b.n_ && a.terms_ == b.terms_;
  }

 private:
  std::size_t n_;
  Terms terms_;
};

namespace detail {
inline void require_same_vars(const LaurentPoly& a, const LaurentPoly& b) {
  if (a.vars() != b.vars()) {
    throw invalid_input("dimension mismatch: " + std::to_string(a.vars()) + " vs " + std::to_string(b.vars()) +
                        " variables");
  }
}
}  // namespace detail

inline LaurentPoly operator+(const LaurentPoly& a, const LaurentPoly& b) {
  detail::require_same_vars(a, b);
  LaurentPoly::Terms t = a.terms();
  for (const auto& [k, c] : b.terms()) t[k] += c;
  return LaurentPoly(a.vars(), std::move(t));
}

inline LaurentPoly operator-(const LaurentPoly& a) {
  LaurentPoly::Terms t;
  for (const auto& [k, c] : a.terms()) t.emplace(k, -c);
  return LaurentPoly(a.vars(), std::move(t));
}

inline LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b) { return a + (-b); }

inline LaurentPoly operator*(const GaussianRational& s, const LaurentPoly& a) {
  LaurentPoly::Terms t;
  for (const auto& [k, c] : a.terms()) t.emplace(k, s * c);
  return LaurentPoly(a.vars(), std::move(t));
}

/// Exact product (coefficient convolution).
inline LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
  detail::require_same_vars(a, b);
  LaurentPoly::Terms t;
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms()) t[ka + kb] += ca * cb;
  return LaurentPoly(a.vars(), std::move(t));
}

/// Torus conjugation: coefficient at k becomes conj of the coefficient at -k.
inline LaurentPoly conj_torus(const LaurentPoly& a) {
  LaurentPoly::Terms t;
  for (const auto& [k, c] : a.terms()) t.emplace(-k, c.conj());
  return LaurentPoly(a.vars(), std::move(t));
}

/// Orthogonal projection onto H^2: drops every term with a negative exponent.
inline LaurentPoly analytic_project(const LaurentPoly& a) {
  LaurentPoly::Terms t;
  for (const auto& [k, c] : a.terms())
    if (k.nonnegative()) t.emplace(k, c);
  return LaurentPoly(a.vars(), std::move(t));
}

/// Exact inner product <a, b> = sum a_k conj(b_k).
inline GaussianRational inner_product(const LaurentPoly& a, const LaurentPoly& b) {
  detail::require_same_vars(a, b);
  GaussianRational s;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const auto& [k, c] : small.terms()) {
    auto it = large.terms().find(k);
    if (it == large.terms().end()) continue;
    s += (&small == &a) ? c * it->second.conj() : it->second * c.conj();
  }
  return s;
}

namespace detail {
inline std::complex<double> ipow(std::complex<double> w, int k) {
  if (k < 0) {
    w = 1.0 / w;
    k = -k;
  }
  std::complex<double> r(1.0, 0.0);
  while (k) {
    if (k & 1) r *= w;
    w *= w;
    k >>= 1;
  }
  return r;
}

inline void require_unimodular_point(std::span<const std::complex<double>> w, std::size_t n) {
  if (w.size() != n) throw invalid_input("evaluation point has wrong length");
  for (auto wi : w)
    if (std::abs(std::abs(wi) - 1.0) > 1e-12) throw invalid_input("evaluation point is not on the torus");
}
}  // namespace detail

/// Floating-point evaluation at a point of the torus (|w_i| = 1 within 1e-12).
inline std::complex<double> evaluate(const LaurentPoly& a, std::span<const std::complex<double>> w) {
  detail::require_unimodular_point(w, a.vars());
  std::complex<double> s(0.0, 0.0);
  for (const auto& [k, c] : a.terms()) {
    std::complex<double> m = c.to_complex();
    for (std::size_t i = 0; i < k.size(); ++i)
      if (k[i] != 0) m *= detail::ipow(w[i], k[i]);
    s += m;
  }
  return s;
}

}  // namespace polytoep
