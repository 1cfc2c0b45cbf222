#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "polytoep/errors.hpp"
#include "polytoep/series.hpp"
#include "polytoep/symbol.hpp"

namespace polytoep {

enum class VarTag { ABSENT, ANALYTIC, COANALYTIC, MIXED };

inline const char* to_string(VarTag t) {
  switch (t) {
    case VarTag::ABSENT: return "ABSENT";
    case VarTag::ANALYTIC: return "ANALYTIC";
    case VarTag::COANALYTIC: return "COANALYTIC";
    case VarTag::MIXED: return "MIXED";
  }
  return "?";
}

/// Which of z_i, conj(z_i) the symbol depends on, per variable. The witness
/// for a positive (negative) dependence is a multi-index with nonzero
/// coefficient and positive (negative) i-th exponent.
struct VariableClassification {
  std::vector<VarTag> tags;
  std::vector<std::optional<MultiIndex>> positive_witness;
  std::vector<std::optional<MultiIndex>> negative_witness;
  bool exact = true;
  double threshold = 0;  // numeric path: coefficient magnitude that counts as nonzero

  bool any(VarTag t) const {
    for (auto x : tags)
      if (x == t) return true;
    return false;
  }
  std::vector<std::size_t> vars_with(VarTag t) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tags.size(); ++i)
      if (tags[i] == t) out.push_back(i);
    return out;
  }
  bool depends_on(std::size_t i) const { return tags.at(i) != VarTag::ABSENT; }
};

namespace detail {

inline VariableClassification tags_from_witnesses(std::size_t n, std::vector<std::optional<MultiIndex>> pos,
                                                  std::vector<std::optional<MultiIndex>> neg) {
  VariableClassification vc;
  vc.tags.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool p = pos[i].has_value(), q = neg[i].has_value();
    vc.tags[i] = p && q ? VarTag::MIXED : p ? VarTag::ANALYTIC : q ? VarTag::COANALYTIC : VarTag::ABSENT;
  }
  vc.positive_witness = std::move(pos);
  vc.negative_witness = std::move(neg);
  return vc;
}

}  // namespace detail

/// Exact path reads the coefficient support. Numeric path scans the box
/// [-scan_depth, scan_depth]^n: a coefficient counts when it exceeds
/// eps plus the expansion's coefficient error. The largest such coefficient
/// (lexicographically first on ties) is the witness.
inline VariableClassification classify_variables(const SymbolExpr& phi, double eps, int scan_depth = 8,
                                                 const ExpansionBudget& budget = {}) {
  const std::size_t n = phi.vars();
  std::vector<std::optional<MultiIndex>> pos(n), neg(n);
  if (is_exact(phi)) {
    // Terms are visited in lexicographic order; keep the first witness.
    const LaurentPoly p = to_laurent(phi);
    for (const auto& [k, c] : p.terms()) {
      for (std::size_t i = 0; i < n; ++i) {
        if (k[i] > 0 && !pos[i]) pos[i] = k;
        if (k[i] < 0 && !neg[i]) neg[i] = k;
      }
    }
    return detail::tags_from_witnesses(n, std::move(pos), std::move(neg));
  }
  if (!(eps > 0)) throw invalid_input("eps must be positive");
  if (scan_depth < 1) throw invalid_input("scan depth must be at least 1");
  const TruncatedSeries ts = expand(phi, IndexBox::symmetric(MultiIndex::filled(n, scan_depth)), eps, budget);
  const double threshold = eps + ts.err_l1;
  std::vector<double> best_pos(n, 0.0), best_neg(n, 0.0);
  for (std::size_t off = 0; off < ts.coeffs.size(); ++off) {
    const double mag = std::abs(ts.coeffs[off]);
    if (!(mag > threshold)) continue;
    const MultiIndex k = ts.box.at(off);
    for (std::size_t i = 0; i < n; ++i) {
      if (k[i] > 0 && mag > best_pos[i]) {
        best_pos[i] = mag;
        pos[i] = k;
      }
      if (k[i] < 0 && mag > best_neg[i]) {
        best_neg[i] = mag;
        neg[i] = k;
      }
    }
  }
  auto vc = detail::tags_from_witnesses(n, std::move(pos), std::move(neg));
  vc.exact = false;
  vc.threshold = threshold;
  return vc;
}

}  // namespace polytoep
