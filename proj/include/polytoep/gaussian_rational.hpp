#pragma once

#include <gmpxx.h>

#include <cctype>
#include <complex>
#include <string>
#include <string_view>
#include <utility>

#include "polytoep/errors.hpp"

namespace polytoep {

/// Exact element of Q(i). Both parts are kept in lowest terms by GMP.
class GaussianRational {
 public:
  GaussianRational() = default;
  GaussianRational(long re) : re_(re) {}  // NOLINT(google-explicit-constructor)
  GaussianRational(mpq_class re, mpq_class im = 0) : re_(std::move(re)), im_(std::move(im)) {
    re_.canonicalize();
    im_.canonicalize();
  }

  static GaussianRational i() { return {mpq_class(0), mpq_class(1)}; }

  const mpq_class& real() const { return re_; }
  const mpq_class& imag() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  bool is_real() const { return sgn(im_) == 0; }

  GaussianRational conj() const { return {re_, -im_}; }

  /// |z|^2, exact.
  mpq_class norm() const { return re_ * re_ + im_ * im_; }

  std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

  /// True when both parts convert to double without rounding.
  bool exactly_representable() const {
    return mpq_class(re_.get_d()) == re_ && mpq_class(im_.get_d()) == im_;
  }

  GaussianRational operator-() const { return {-re_, -im_}; }

  GaussianRational& operator+=(const GaussianRational& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  GaussianRational& operator-=(const GaussianRational& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  GaussianRational& operator*=(const GaussianRational& o) {
    mpq_class r = re_ * o.re_ - im_ * o.im_;
    mpq_class m = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(m);
    return *this;
  }
  GaussianRational& operator/=(const GaussianRational& o) {
    if (o.is_zero()) throw invalid_input("division by zero Gaussian rational");
    mpq_class d = o.norm();
    mpq_class r = (re_ * o.re_ + im_ * o.im_) / d;
    mpq_class m = (im_ * o.re_ - re_ * o.im_) / d;
    re_ = std::move(r);
    im_ = std::move(m);
    return *this;
  }

  friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
  friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
  friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
  friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }

  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }

  /// Canonical literal: `3/4-1/2i`, `2`, `i`, `-3i`, `0`.
  std::string to_string() const {
    if (sgn(im_) == 0) return re_.get_str();
    std::string out;
    const bool has_real = sgn(re_) != 0;
    if (has_real) out = re_.get_str();
    mpq_class mag = abs(im_);
    if (sgn(im_) < 0) {
      out += '-';
    } else if (has_real) {
      out += '+';
    }
    if (mag != 1) out += mag.get_str();
    out += 'i';
    return out;
  }

  /// Parses `[-]a[/b][(+|-)c[/d]i]` and the imaginary-only forms `[-][c[/d]]i`.
  /// Float literals are rejected.
  static GaussianRational parse(std::string_view text);

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

namespace detail {

struct LiteralCursor {
  std::string_view s;
  std::size_t pos = 0;

  bool done() const { return pos >= s.size(); }
  char peek() const { return done() ? '\0' : s[pos]; }

  std::string digits() {
    std::size_t start = pos;
    while (!done() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    return std::string(s.substr(start, pos - start));
  }

  // Reads `a[/b]`; returns false when no digits are present.
  bool unsigned_rational(mpq_class& out) {
    std::string num = digits();
    if (num.empty()) return false;
    mpz_class n(num, 10);
    mpz_class d(1);
    if (peek() == '/') {
      ++pos;
      std::string den = digits();
      if (den.empty()) throw invalid_input("missing denominator in literal '" + std::string(s) + "'");
      d = mpz_class(den, 10);
      if (d == 0) throw invalid_input("zero denominator in literal '" + std::string(s) + "'");
    }
    out = mpq_class(n, d);
    out.canonicalize();
    return true;
  }
};

}  // namespace detail

inline GaussianRational GaussianRational::parse(std::string_view text) {
  const std::string original(text);
  if (text.empty()) throw invalid_input("empty Gaussian-rational literal");
  for (char c : text) {
    if (c == '.' || c == 'e' || c == 'E' || std::isspace(static_cast<unsigned char>(c))) {
      throw invalid_input("not an exact Gaussian-rational literal: '" + original + "'");
    }
  }
  detail::LiteralCursor cur{text};
  bool neg = false;
  if (cur.peek() == '-') {
    neg = true;
    ++cur.pos;
  }
  mpq_class first;
  const bool have_first = cur.unsigned_rational(first);
  if (cur.peek() == 'i') {
    ++cur.pos;
    if (!cur.done()) throw invalid_input("trailing characters in literal '" + original + "'");
    mpq_class im = have_first ? first : mpq_class(1);
    return {mpq_class(0), neg ? mpq_class(-im) : im};
  }
  if (!have_first) throw invalid_input("malformed literal '" + original + "'");
  mpq_class re = neg ? mpq_class(-first) : first;
  if (cur.done()) return {re, mpq_class(0)};

  const char sign = cur.peek();
  if (sign != '+' && sign != '-') throw invalid_input("malformed literal '" + original + "'");
  ++cur.pos;
  mpq_class second;
  const bool have_second = cur.unsigned_rational(second);
  if (cur.peek() != 'i') throw invalid_input("imaginary part must end in 'i': '" + original + "'");
  ++cur.pos;
  if (!cur.done()) throw invalid_input("trailing characters in literal '" + original + "'");
  mpq_class im = have_second ? second : mpq_class(1);
  if (sign == '-') im = -im;
  return {re, im};
}

}  // namespace polytoep
