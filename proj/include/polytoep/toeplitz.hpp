#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "polytoep/errors.hpp"
#include "polytoep/laurent.hpp"
#include "polytoep/linalg.hpp"
#include "polytoep/series.hpp"
#include "polytoep/symbol.hpp"

namespace polytoep {

/// Monomial basis {z^k : 0 <= k <= d} of a finite section of H^2, ordered
/// lexicographically with k_1 most significant.
class DegreeBox {
 public:
  explicit DegreeBox(MultiIndex d) : d_(std::move(d)), box_(MultiIndex(d_.size()), d_) {
    if (!d_.nonnegative()) throw invalid_input("degree box needs nonnegative degrees");
  }
  static DegreeBox cube(std::size_t n, int degree) { return DegreeBox(MultiIndex::filled(n, degree)); }

  const MultiIndex& degrees() const { return d_; }
  std::size_t vars() const { return d_.size(); }
  std::size_t dim() const { return box_.cells(); }
  const IndexBox& index_box() const { return box_; }

  bool contains(const MultiIndex& k) const { return box_.contains(k); }
  std::size_t index_of(const MultiIndex& k) const { return box_.offset(k); }
  MultiIndex at(std::size_t i) const { return box_.at(i); }

  /// Componentwise this <= outer.
  bool inside(const DegreeBox& outer) const {
    return vars() == outer.vars() && dominated_by(d_, outer.d_);
  }

  std::vector<MultiIndex> monomials() const {
    std::vector<MultiIndex> out;
    out.reserve(dim());
    for (std::size_t i = 0; i < dim(); ++i) out.push_back(at(i));
    return out;
  }

  friend bool operator==(const DegreeBox& a, const DegreeBox& b) { return a.d_ == b.d_; }

 private:
  MultiIndex d_;
  IndexBox box_;
};

/// Dense P_d T_phi P_d with a bound on its entry errors. `entry_err` bounds
/// the l1 error of the underlying coefficients, hence every entry and every
/// row/column sum of the error matrix.
struct CompressionMatrix {
  DegreeBox box;
  ComplexMatrix M;
  double entry_err = 0;
};

/// T_phi f = P(phi f) for a polynomial f in H^2, exactly.
inline LaurentPoly toeplitz_apply_exact(const LaurentPoly& phi, const LaurentPoly& f) {
  if (!f.is_analytic()) throw invalid_input("toeplitz_apply_exact: f has negative exponents (not in H^2)");
  return analytic_project(phi * f);
}

namespace detail {

// Entry (j,k) = series coefficient at j - k, via linear offsets.
inline ComplexMatrix toeplitz_from_series(const TruncatedSeries& ts, const DegreeBox& box) {
  const std::size_t n = box.vars();
  const std::size_t dim = box.dim();
  std::vector<long> lin(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const MultiIndex k = box.at(i);
    long v = 0;
    for (std::size_t t = 0; t < n; ++t) v += static_cast<long>(k[t]) * static_cast<long>(ts.box.stride(t));
    lin[i] = v;
  }
  long base = 0;
  for (std::size_t t = 0; t < n; ++t) base -= static_cast<long>(ts.box.lower()[t]) * static_cast<long>(ts.box.stride(t));
  ComplexMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c)
    for (std::size_t r = 0; r < dim; ++r)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ts.coeffs[static_cast<std::size_t>(lin[r] - lin[c] + base)];
  return m;
}

inline void require_box_vars(const SymbolExpr& phi, const DegreeBox& box) {
  if (phi.vars() != box.vars()) throw invalid_input("degree box and symbol have different variable counts");
}

}  // namespace detail

/// Finite corner of the Toeplitz matrix: entry (j,k) = phi^(j - k).
inline CompressionMatrix compression(const SymbolExpr& phi, const DegreeBox& box, double eps,
                                     const ExpansionBudget& budget = {}) {
  detail::require_box_vars(phi, box);
  const TruncatedSeries ts = expand(phi, IndexBox::symmetric(box.degrees()), eps, budget);
  return {box, detail::toeplitz_from_series(ts, box), ts.err_l1};
}

/// Dense matrix of Gaussian rationals.
struct ExactMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<GaussianRational> data;  // column-major

  ExactMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  GaussianRational& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
  const GaussianRational& operator()(std::size_t i, std::size_t j) const { return data[j * rows + i]; }

  ComplexMatrix to_complex() const {
    ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < rows; ++i)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j).to_complex();
    return m;
  }

  friend ExactMatrix operator-(const ExactMatrix& a, const ExactMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw invalid_input("exact matrix shape mismatch");
    ExactMatrix r(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) r.data[i] = a.data[i] - b.data[i];
    return r;
  }
  bool is_zero() const {
    return std::all_of(data.begin(), data.end(), [](const GaussianRational& g) { return g.is_zero(); });
  }
};

enum class GramKind {
  adjoint_first,   // compression of T_psi^* T_phi
  adjoint_second,  // compression of T_phi T_psi^*
};

/// True compression P_box (T_psi^* T_phi) P_box or P_box (T_phi T_psi^*) P_box
/// with no truncation leakage: entries are the finite inner products
/// <T_phi z^k, T_psi z^j> resp. <T_psi^* z^k, T_phi^* z^j>.
inline ExactMatrix gram_compression_exact(const LaurentPoly& phi, const LaurentPoly& psi, const DegreeBox& box,
                                          GramKind kind) {
  if (phi.vars() != box.vars() || psi.vars() != box.vars())
    throw invalid_input("gram_compression: variable count mismatch");
  const auto mons = box.monomials();
  const LaurentPoly right = kind == GramKind::adjoint_first ? phi : conj_torus(psi);
  const LaurentPoly left = kind == GramKind::adjoint_first ? psi : conj_torus(phi);
  std::vector<LaurentPoly> col_images, row_images;
  col_images.reserve(mons.size());
  row_images.reserve(mons.size());
  for (const auto& k : mons) {
    const LaurentPoly zk = LaurentPoly::monomial(k);
    col_images.push_back(toeplitz_apply_exact(right, zk));
    row_images.push_back(toeplitz_apply_exact(left, zk));
  }
  ExactMatrix g(mons.size(), mons.size());
  for (std::size_t c = 0; c < mons.size(); ++c)
    for (std::size_t r = 0; r < mons.size(); ++r) g(r, c) = inner_product(col_images[c], row_images[r]);
  return g;
}

inline ComplexMatrix gram_compression(const LaurentPoly& phi, const LaurentPoly& psi, const DegreeBox& box,
                                      GramKind kind) {
  return gram_compression_exact(phi, psi, box, kind).to_complex();
}

inline ComplexMatrix gram_compression(const SymbolExpr& phi, const SymbolExpr& psi, const DegreeBox& box,
                                      GramKind kind) {
  if (!is_exact(phi) || !is_exact(psi)) throw invalid_input("gram_compression requires exact symbols");
  return gram_compression(to_laurent(phi), to_laurent(psi), box, kind);
}

/// Compression of T_phi on an outer box D plus everything needed to bound
/// the truncation leakage of products of such compressions.
struct ToeplitzModel {
  CompressionMatrix comp;
  TruncatedSeries series;  // coefficients over [-D, D]
  double norm_bound = 0;   // >= ||T_phi|| = ||phi||_inf
  double schur_bound = 0;  // >= max row/column l1 sum of |comp.M|

  double tail_beyond(const MultiIndex& margin) const { return series.mass_beyond(margin); }
};

inline ToeplitzModel build_model(const SymbolExpr& phi, const DegreeBox& outer, double eps,
                                 const ExpansionBudget& budget = {}) {
  detail::require_box_vars(phi, outer);
  TruncatedSeries ts = expand(phi, IndexBox::symmetric(outer.degrees()), eps, budget);
  CompressionMatrix comp{outer, detail::toeplitz_from_series(ts, outer), ts.err_l1};
  const double norm_bound = std::min(structural_bounds(phi).sup, ts.l1_bound());
  const double schur = ts.l1_mass();
  return {std::move(comp), std::move(ts), norm_bound, schur};
}

/// One factor of an operator word: T_phi or T_phi^*.
struct WordFactor {
  const ToeplitzModel* model = nullptr;
  bool adjoint = false;
};

using Word = std::vector<WordFactor>;

namespace detail {

inline double gamma(std::size_t n) {
  const double nu = static_cast<double>(n) * kUnitRoundoff;
  return nu / (1.0 - nu);
}

inline std::vector<Eigen::Index> embedding(const DegreeBox& inner, const DegreeBox& outer) {
  if (!inner.inside(outer)) throw invalid_input("inner box must lie inside the outer box");
  std::vector<Eigen::Index> idx(inner.dim());
  for (std::size_t i = 0; i < inner.dim(); ++i) idx[i] = static_cast<Eigen::Index>(outer.index_of(inner.at(i)));
  return idx;
}

inline double box_dim(const MultiIndex& d) {
  double p = 1;
  for (int v : d) p *= static_cast<double>(v + 1);
  return p;
}

// Bound on ||P_{D^c} F_q ... F_1 P_d|| where F_1 acts first, by nested boxes
// B_t = d + t*mu with mu = floor((D - d) / q).
inline double chain_leakage(const std::vector<const WordFactor*>& applied_first_to_last, const MultiIndex& d,
                            const MultiIndex& D) {
  const std::size_t q = applied_first_to_last.size();
  const std::size_t n = d.size();
  MultiIndex mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = (D[i] - d[i]) / static_cast<int>(q);
  double total = 0;
  for (std::size_t t = 0; t < q; ++t) {
    MultiIndex bt(n);
    for (std::size_t i = 0; i < n; ++i) bt[i] = d[i] + static_cast<int>(t) * mu[i];
    double others = 1;
    for (std::size_t u = 0; u < q; ++u)
      if (u != t) others *= applied_first_to_last[u]->model->norm_bound;
    total += others * std::sqrt(box_dim(bt)) * applied_first_to_last[t]->model->tail_beyond(mu);
  }
  return total;
}

}  // namespace detail

/// P_d (M_1 M_2 ... M_L) P_d with each M_i the outer-box compression (or its
/// adjoint), evaluated right to left on the d-columns only.
inline ComplexMatrix corner_word(const Word& word, const DegreeBox& inner) {
  if (word.empty()) throw invalid_input("empty operator word");
  const DegreeBox& outer = word.front().model->comp.box;
  const auto idx = detail::embedding(inner, outer);
  const Eigen::Index big = static_cast<Eigen::Index>(outer.dim());
  const Eigen::Index small = static_cast<Eigen::Index>(inner.dim());
  ComplexMatrix x = ComplexMatrix::Zero(big, small);
  for (Eigen::Index c = 0; c < small; ++c) x(idx[static_cast<std::size_t>(c)], c) = 1.0;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (!(it->model->comp.box == outer)) throw invalid_input("word factors use different outer boxes");
    if (it->adjoint) {
      x = it->model->comp.M.adjoint() * x;
    } else {
      x = it->model->comp.M * x;
    }
  }
  ComplexMatrix out(small, small);
  for (Eigen::Index r = 0; r < small; ++r) out.row(r) = x.row(idx[static_cast<std::size_t>(r)]);
  return out;
}

/// Certified bound on || corner_word(word) - P_d A_1 ... A_L P_d || where A_i
/// are the true operators on H^2. Three contributions:
///  - truncation: telescoping over the position s where P_{D^c} is inserted,
///    each term bounded through whichever side is cheaper via nested boxes;
///  - coefficient errors: prod(S_i + e_i) - prod(S_i);
///  - rounding: L * gamma(dim D) * prod(Schur bounds).
inline double word_leakage(const Word& word, const DegreeBox& inner) {
  if (word.empty()) throw invalid_input("empty operator word");
  const DegreeBox& outer = word.front().model->comp.box;
  if (!inner.inside(outer)) throw invalid_input("inner box must lie inside the outer box");
  const std::size_t L = word.size();
  const MultiIndex& d = inner.degrees();
  const MultiIndex& D = outer.degrees();

  double truncation = 0;
  for (std::size_t s = 1; s < L; ++s) {
    double left_norm = 1, right_norm = 1;
    for (std::size_t i = 0; i < s; ++i) left_norm *= word[i].model->norm_bound;
    for (std::size_t i = s; i < L; ++i) right_norm *= word[i].model->norm_bound;
    // Right piece P_{D^c} A_{s+1} ... A_L P_d: A_L acts first.
    std::vector<const WordFactor*> right;
    for (std::size_t i = L; i-- > s;) right.push_back(&word[i]);
    // Left piece (P_d A_1 ... A_s P_{D^c})^*: A_1^* acts first.
    std::vector<const WordFactor*> left;
    for (std::size_t i = 0; i < s; ++i) left.push_back(&word[i]);
    const double via_right = left_norm * detail::chain_leakage(right, d, D);
    const double via_left = detail::chain_leakage(left, d, D) * right_norm;
    truncation += std::min(via_right, via_left);
  }

  double exact_prod = 1, perturbed_prod = 1, schur_prod = 1;
  for (const auto& f : word) {
    exact_prod *= f.model->norm_bound;
    perturbed_prod *= f.model->norm_bound + f.model->comp.entry_err;
    schur_prod *= std::max(f.model->schur_bound, f.model->norm_bound);
  }
  const double coefficient = perturbed_prod - exact_prod;
  const double rounding = L > 1 ? static_cast<double>(L) * detail::gamma(outer.dim()) * schur_prod : 0.0;
  return truncation + coefficient + rounding;
}

struct ResidualEstimate {
  double residual = 0;
  double leakage_bound = 0;
};

/// ||corner(lhs) - corner(rhs)|| and a certified bound on its distance from
/// the same quantity for the true operators.
inline ResidualEstimate word_difference(const Word& lhs, const Word& rhs, const DegreeBox& inner) {
  const ComplexMatrix a = corner_word(lhs, inner);
  const ComplexMatrix b = corner_word(rhs, inner);
  const double residual = operator_norm(a - b);
  const double rounding = 4 * kUnitRoundoff * (operator_norm(a) + operator_norm(b)) * std::sqrt(double(inner.dim()));
  return {residual, word_leakage(lhs, inner) + word_leakage(rhs, inner) + rounding};
}

inline Word power_word(const ToeplitzModel& m, int power, bool adjoint) {
  return Word(static_cast<std::size_t>(power), WordFactor{&m, adjoint});
}

inline Word concat(std::initializer_list<Word> parts) {
  Word out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

/// d-corner of V^m V^{*m} V^m - V^m with V the D-compression.
inline ResidualEstimate power_pi_residual(const ToeplitzModel& model, int power, const DegreeBox& inner) {
  if (power < 1) throw invalid_input("power must be at least 1");
  const Word vm = power_word(model, power, false);
  const Word lhs = concat({vm, power_word(model, power, true), vm});
  return word_difference(lhs, vm, inner);
}

/// Partial-isometry residual ||corner_d(M_D M_D^* M_D - M_D)|| with its
/// certified leakage bound.
inline ResidualEstimate pi_residual(const SymbolExpr& phi, const DegreeBox& inner, const DegreeBox& outer, double eps,
                                    const ExpansionBudget& budget = {}) {
  detail::require_box_vars(phi, inner);
  if (!inner.inside(outer)) throw invalid_input("inner box must lie inside the outer box");
  if (!(eps > 0)) throw invalid_input("eps must be positive");
  const ToeplitzModel model = build_model(phi, outer, eps, budget);
  return power_pi_residual(model, 1, inner);
}

/// Exact application of a word of Toeplitz operators (and adjoints) with
/// polynomial symbols, rightmost factor first.
struct ExactFactor {
  const LaurentPoly* symbol = nullptr;
  bool adjoint = false;
};

inline LaurentPoly apply_word_exact(const std::vector<ExactFactor>& word, LaurentPoly f) {
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (f.is_zero()) return f;
    f = it->adjoint ? toeplitz_apply_exact(conj_torus(*it->symbol), f) : toeplitz_apply_exact(*it->symbol, f);
  }
  return f;
}

}  // namespace polytoep
