#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "polytoep/errors.hpp"
#include "polytoep/laurent.hpp"
#include "polytoep/symbol.hpp"

namespace polytoep {

inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

/// Rectangular set of multi-indices lower <= k <= upper, enumerated
/// lexicographically with the first variable most significant.
class IndexBox {
 public:
  IndexBox(MultiIndex lower, MultiIndex upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.size() == 0) throw invalid_input("index box bounds mismatch");
    if (!dominated_by(lower_, upper_)) throw invalid_input("index box lower bound exceeds upper bound");
    strides_.assign(lower_.size(), 1);
    for (std::size_t i = lower_.size(); i-- > 1;)
      strides_[i - 1] = strides_[i] * static_cast<std::size_t>(upper_[i] - lower_[i] + 1);
    cells_ = strides_[0] * static_cast<std::size_t>(upper_[0] - lower_[0] + 1);
  }

  /// [-radius, radius] componentwise.
  static IndexBox symmetric(const MultiIndex& radius) { return IndexBox(-radius, radius); }

  const MultiIndex& lower() const { return lower_; }
  const MultiIndex& upper() const { return upper_; }
  std::size_t vars() const { return lower_.size(); }
  std::size_t cells() const { return cells_; }
  std::size_t stride(std::size_t i) const { return strides_[i]; }

  bool contains(const MultiIndex& k) const {
    if (k.size() != vars()) return false;
    for (std::size_t i = 0; i < vars(); ++i)
      if (k[i] < lower_[i] || k[i] > upper_[i]) return false;
    return true;
  }

  std::size_t offset(const MultiIndex& k) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < vars(); ++i) off += static_cast<std::size_t>(k[i] - lower_[i]) * strides_[i];
    return off;
  }

  MultiIndex at(std::size_t off) const {
    MultiIndex k(vars());
    for (std::size_t i = 0; i < vars(); ++i) {
      k[i] = lower_[i] + static_cast<int>(off / strides_[i]);
      off %= strides_[i];
    }
    return k;
  }

  friend bool operator==(const IndexBox& a, const IndexBox& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

 private:
  MultiIndex lower_, upper_;
  std::vector<std::size_t> strides_;
  std::size_t cells_ = 0;
};

/// Fourier coefficients of a symbol over a box together with an error ledger.
///
/// `err_l1` bounds the l1 norm of (stored - true) over the box, hence every
/// entrywise error. `tail_bound` bounds the l1 mass of the true coefficients
/// outside the box.
struct TruncatedSeries {
  IndexBox box;
  std::vector<std::complex<double>> coeffs;
  double tail_bound = 0;
  double err_l1 = 0;

  std::complex<double> at(const MultiIndex& k) const {
    return box.contains(k) ? coeffs[box.offset(k)] : std::complex<double>{};
  }

  double l1_mass() const {
    double s = 0;
    for (auto c : coeffs) s += std::abs(c);
    return s;
  }

  /// Certified bound on the true l1 mass at indices r with |r_i| > margin_i
  /// for some i.
  double mass_beyond(const MultiIndex& margin) const {
    double s = 0;
    for (std::size_t off = 0; off < coeffs.size(); ++off) {
      if (coeffs[off] == std::complex<double>{}) continue;
      const MultiIndex k = box.at(off);
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (std::abs(k[i]) > margin[i]) {
          s += std::abs(coeffs[off]);
          break;
        }
      }
    }
    return s + tail_bound + err_l1;
  }

  /// Certified upper bound on the l1 norm of the whole true series.
  double l1_bound() const { return l1_mass() + tail_bound + err_l1; }
};

struct ExpansionBudget {
  /// Maximum number of cells of the working box.
  std::size_t max_cells = std::size_t{1} << 22;
};

namespace detail {

// Dense approximation over a symmetric working box; `err` bounds the l1
// norm of (true - stored) over all of Z^n, exterior included.
struct WorkingSeries {
  std::vector<std::complex<double>> c;
  double err = 0;
};

class Expander {
 public:
  explicit Expander(const IndexBox& work) : work_(work) {}

  WorkingSeries run(const SymbolExpr& s) const {
    return std::visit(overloaded{
                          [&](const node::Constant& c) { return constant(to_complex(c.value)); },
                          [&](const node::Monomial& m) { return laurent(LaurentPoly::monomial(m.k)); },
                          [&](const node::Blaschke& b) { return blaschke(b.factor); },
                          [&](const node::Conj& c) { return reflect_conj(run(c.arg)); },
                          [&](const node::Product& p) {
                            WorkingSeries acc = run(p.factors.front());
                            for (std::size_t i = 1; i < p.factors.size(); ++i) acc = multiply(acc, run(p.factors[i]));
                            return acc;
                          },
                          [&](const node::Sum& p) {
                            WorkingSeries acc = run(p.terms.front());
                            for (std::size_t i = 1; i < p.terms.size(); ++i) acc = add(acc, run(p.terms[i]));
                            return acc;
                          },
                          [&](const node::Laurent& l) { return laurent(l.poly); },
                      },
                      s.node().v);
  }

 private:
  WorkingSeries zeros() const { return {std::vector<std::complex<double>>(work_.cells()), 0.0}; }

  WorkingSeries constant(std::complex<double> v) const {
    WorkingSeries w = zeros();
    w.c[work_.offset(MultiIndex(work_.vars()))] = v;
    return w;
  }

  WorkingSeries laurent(const LaurentPoly& p) const {
    WorkingSeries w = zeros();
    for (const auto& [k, c] : p.terms()) {
      const std::complex<double> v = c.to_complex();
      if (work_.contains(k)) {
        w.c[work_.offset(k)] = v;
        if (!c.exactly_representable()) w.err += 2 * kUnitRoundoff * std::abs(v);
      } else {
        w.err += std::abs(v) * (1 + 2 * kUnitRoundoff);
      }
    }
    return w;
  }

  // c_0 = -a, c_k = conj(a)^(k-1) (1 - |a|^2) for k >= 1.
  WorkingSeries blaschke(const BlaschkeFactor& b) const {
    WorkingSeries w = zeros();
    const std::complex<double> a = to_complex(b.zero);
    const double r = std::abs(a);
    const std::size_t n = work_.vars();
    const int depth = work_.upper()[b.var];
    MultiIndex k(n);
    w.c[work_.offset(k)] = -a;
    const double scale = 1.0 - std::norm(a);
    std::complex<double> p(1.0, 0.0);
    for (int j = 1; j <= depth; ++j) {
      k[b.var] = j;
      w.c[work_.offset(k)] = p * scale;
      p *= std::conj(a);
    }
    // Exterior geometric tail plus rounding. The computed c_j carries
    // relative error <= 3 (j + 2) u, and converting an inexact zero to double
    // moves a by <= u r; both sum geometrically over j.
    const double geo = 1.0 / (1.0 - r);
    const double powers = 6.0 * kUnitRoundoff * (1.0 + r) * (geo + 2.0);
    const double zero_shift = 2.0 * kUnitRoundoff * r * (1.0 + geo * geo + 2.0 * geo);
    w.err = std::pow(r, depth) * (1.0 + r) + powers + zero_shift;
    return w;
  }

  WorkingSeries reflect_conj(WorkingSeries x) const {
    std::reverse(x.c.begin(), x.c.end());
    for (auto& v : x.c) v = std::conj(v);
    return x;
  }

  WorkingSeries add(const WorkingSeries& a, const WorkingSeries& b) const {
    WorkingSeries w = zeros();
    double mass = 0;
    for (std::size_t i = 0; i < w.c.size(); ++i) {
      w.c[i] = a.c[i] + b.c[i];
      mass += std::abs(w.c[i]);
    }
    w.err = a.err + b.err + 2 * kUnitRoundoff * mass;
    return w;
  }

  struct Sparse {
    std::vector<int> coords;  // row-major, vars() per entry
    std::vector<std::complex<double>> values;
    double l1 = 0;
  };

  Sparse sparse(const WorkingSeries& x) const {
    Sparse s;
    const std::size_t n = work_.vars();
    for (std::size_t off = 0; off < x.c.size(); ++off) {
      if (x.c[off] == std::complex<double>{}) continue;
      std::size_t rem = off;
      for (std::size_t i = 0; i < n; ++i) {
        s.coords.push_back(work_.lower()[i] + static_cast<int>(rem / work_.stride(i)));
        rem %= work_.stride(i);
      }
      s.values.push_back(x.c[off]);
      s.l1 += std::abs(x.c[off]);
    }
    return s;
  }

  WorkingSeries multiply(const WorkingSeries& a, const WorkingSeries& b) const {
    const Sparse sa = sparse(a), sb = sparse(b);
    const std::size_t n = work_.vars();
    WorkingSeries w = zeros();
    double outside = 0;
    for (std::size_t ia = 0; ia < sa.values.size(); ++ia) {
      const int* ca = &sa.coords[ia * n];
      for (std::size_t ib = 0; ib < sb.values.size(); ++ib) {
        const int* cb = &sb.coords[ib * n];
        std::size_t off = 0;
        bool inside = true;
        for (std::size_t i = 0; i < n; ++i) {
          const int s = ca[i] + cb[i];
          if (s < work_.lower()[i] || s > work_.upper()[i]) {
            inside = false;
            break;
          }
          off += static_cast<std::size_t>(s - work_.lower()[i]) * work_.stride(i);
        }
        const std::complex<double> v = sa.values[ia] * sb.values[ib];
        if (inside) {
          w.c[off] += v;
        } else {
          outside += std::abs(v);
        }
      }
    }
    const double terms = static_cast<double>(std::min(sa.values.size(), sb.values.size()) + 2);
    const double rounding = 2 * terms * kUnitRoundoff * sa.l1 * sb.l1;
    w.err = outside * (1 + 4 * kUnitRoundoff) + sa.l1 * b.err + a.err * sb.l1 + a.err * b.err + rounding;
    return w;
  }

  IndexBox work_;
};

// Smallest K with r^K (1+r) <= target (0 when r == 0).
inline int blaschke_depth(double r, double target) {
  if (r == 0.0) return 0;
  const double k = std::log(target / (1.0 + r)) / std::log(r);
  return std::max(0, static_cast<int>(std::ceil(k)));
}

inline void collect_blaschke_moduli(const SymbolExpr& s, std::vector<double>& out) {
  std::visit(overloaded{
                 [&](const node::Blaschke& b) { out.push_back(b.factor.modulus()); },
                 [&](const node::Conj& c) { collect_blaschke_moduli(c.arg, out); },
                 [&](const node::Product& p) {
                   for (const auto& f : p.factors) collect_blaschke_moduli(f, out);
                 },
                 [&](const node::Sum& p) {
                   for (const auto& t : p.terms) collect_blaschke_moduli(t, out);
                 },
                 [&](const auto&) {},
             },
             s.node().v);
}

inline TruncatedSeries expand_exact(const LaurentPoly& p, const IndexBox& box) {
  TruncatedSeries ts{box, std::vector<std::complex<double>>(box.cells()), 0.0, 0.0};
  for (const auto& [k, c] : p.terms()) {
    const std::complex<double> v = c.to_complex();
    if (box.contains(k)) {
      ts.coeffs[box.offset(k)] = v;
      if (!c.exactly_representable()) ts.err_l1 += 2 * kUnitRoundoff * std::abs(v);
    } else {
      ts.tail_bound += std::abs(v);
    }
  }
  ts.tail_bound *= 1 + 4 * kUnitRoundoff;
  return ts;
}

}  // namespace detail

/// Fourier coefficients of `s` over `box`. Exact symbols are converted from
/// their Laurent form; otherwise the coefficients carry an l1 error of at
/// most `eps`, obtained by widening a symmetric working box until the
/// propagated error ledger meets the target.
inline TruncatedSeries expand(const SymbolExpr& s, const IndexBox& box, double eps, const ExpansionBudget& budget = {}) {
  if (box.vars() != s.vars()) throw invalid_input("expansion box has wrong number of variables");
  if (is_exact(s)) return detail::expand_exact(to_laurent(s), box);
  if (!(eps > 0)) throw invalid_input("eps must be positive");

  const std::size_t n = s.vars();
  std::vector<double> moduli;
  detail::collect_blaschke_moduli(s, moduli);
  const double target = eps / (8.0 * static_cast<double>(node_count(s)));
  int margin = 0;
  for (double r : moduli) margin = std::max(margin, detail::blaschke_depth(r, target));

  auto fmt = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return std::string(buf);
  };
  double prev_err = std::numeric_limits<double>::infinity();
  for (;;) {
    MultiIndex radius(n);
    for (std::size_t i = 0; i < n; ++i) radius[i] = std::max(std::abs(box.lower()[i]), std::abs(box.upper()[i])) + margin;
    const IndexBox work = IndexBox::symmetric(radius);
    if (work.cells() > budget.max_cells)
      throw budget_exceeded("expansion budget exceeded: cannot reach eps=" + fmt(eps) + " within " +
                            std::to_string(budget.max_cells) + " cells");
    detail::WorkingSeries w = detail::Expander(work).run(s);
    // Widening only shrinks the truncation tail; once that stalls, what is
    // left is the rounding floor.
    if (w.err > eps && w.err >= (1 - 1e-3) * prev_err)
      throw budget_exceeded("eps=" + fmt(eps) + " is below the rounding floor (" + fmt(w.err) +
                            ") of this symbol's expansion");
    prev_err = w.err;
    if (w.err <= eps) {
      TruncatedSeries ts{box, std::vector<std::complex<double>>(box.cells()), 0.0, w.err};
      double outside = 0;
      for (std::size_t off = 0; off < w.c.size(); ++off) {
        if (w.c[off] == std::complex<double>{}) continue;
        const MultiIndex k = work.at(off);
        if (box.contains(k)) {
          ts.coeffs[box.offset(k)] = w.c[off];
        } else {
          outside += std::abs(w.c[off]);
        }
      }
      ts.tail_bound = outside * (1 + 4 * kUnitRoundoff) + w.err;
      return ts;
    }
    margin = std::max(2 * margin, margin + 8);
  }
}

struct CoeffEstimate {
  std::complex<double> value;
  double error = 0;
};

/// Exact Fourier coefficient of an exact symbol.
inline GaussianRational coeff_exact(const SymbolExpr& s, const MultiIndex& k) { return to_laurent(s).coeff(k); }

/// Fourier coefficient with |value - true| <= error <= eps (error is the
/// float-conversion bound on the exact path).
inline CoeffEstimate coeff(const SymbolExpr& s, const MultiIndex& k, double eps, const ExpansionBudget& budget = {}) {
  if (k.size() != s.vars()) throw invalid_input("coefficient index has wrong length");
  const TruncatedSeries ts = expand(s, IndexBox(k, k), eps, budget);
  return {ts.coeffs.front(), ts.err_l1};
}

/// Visits every point of the uniform m x ... x m torus grid. Angles are
/// computed as 2 pi (j / m) so that the grid for m is a subset of the grid
/// for 2m bit-for-bit.
inline void for_each_grid_point(std::size_t n, int m,
                                const std::function<void(std::span<const std::complex<double>>)>& visit) {
  if (m < 2) throw invalid_input("grid_m must be at least 2");
  double total = std::pow(static_cast<double>(m), static_cast<double>(n));
  if (total > static_cast<double>(std::size_t{1} << 26)) throw budget_exceeded("torus grid too large");
  std::vector<std::complex<double>> roots(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j)
    roots[static_cast<std::size_t>(j)] =
        std::polar(1.0, 2.0 * std::numbers::pi * (static_cast<double>(j) / static_cast<double>(m)));
  std::vector<int> idx(n, 0);
  std::vector<std::complex<double>> w(n, roots[0]);
  for (;;) {
    visit(w);
    std::size_t i = n;
    while (i-- > 0) {
      if (++idx[i] < m) {
        w[i] = roots[static_cast<std::size_t>(idx[i])];
        break;
      }
      idx[i] = 0;
      w[i] = roots[0];
    }
    if (i == static_cast<std::size_t>(-1)) return;
  }
}

struct SupNormBounds {
  double lower = 0;
  double upper = 0;
};

/// Bracket lower <= ||phi||_inf <= upper from a uniform torus grid plus a
/// Lipschitz slack (pi/m) * sum_i L_i, where L_i bounds |d phi / d theta_i|
/// (sum |a_k||k_i| for exact symbols, structural bounds otherwise).
inline SupNormBounds sup_norm_bounds(const SymbolExpr& s, int grid_m) {
  if (grid_m < 2) throw invalid_input("grid_m must be at least 2");
  const std::size_t n = s.vars();
  const double h = std::numbers::pi / grid_m;
  if (is_exact(s)) {
    const LaurentPoly p = to_laurent(s);
    if (p.size() <= 1) {
      const double mag = p.is_zero() ? 0.0 : std::sqrt(p.terms().begin()->second.norm().get_d());
      return {mag, mag};
    }
    double lower = 0;
    for_each_grid_point(n, grid_m, [&](auto w) { lower = std::max(lower, std::abs(evaluate(p, w))); });
    double slope = 0;
    for (const auto& [k, c] : p.terms()) slope += std::abs(c.to_complex()) * static_cast<double>(k.abs_sum());
    const double upper = std::min(lower + h * slope, p.l1_norm());
    return {lower, std::max(lower, upper)};
  }
  const SymbolBounds sb = structural_bounds(s);
  double lower = 0;
  for_each_grid_point(n, grid_m, [&](auto w) { lower = std::max(lower, std::abs(evaluate(s, w))); });
  double slope = 0;
  for (double l : sb.lipschitz) slope += l;
  const double upper = std::min(lower + h * slope, sb.sup);
  return {lower, std::max(lower, upper)};
}

}  // namespace polytoep
