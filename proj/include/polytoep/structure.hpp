#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polytoep/checks.hpp"
#include "polytoep/errors.hpp"
#include "polytoep/laurent.hpp"
#include "polytoep/linalg.hpp"
#include "polytoep/series.hpp"
#include "polytoep/symbol.hpp"
#include "polytoep/toeplitz.hpp"
#include "polytoep/variables.hpp"

namespace polytoep {

/// phi = scalar * conj(phi1) * phi2 with phi1, phi2 inner in disjoint
/// variables. `degree1`/`degree2` count, per variable, monomial exponent
/// plus Blaschke factors (the multiplicity of the inner factor in z_i).
struct FactorizationResult {
  SymbolExpr phi1;
  SymbolExpr phi2;
  Scalar scalar = GaussianRational(1);
  std::string method;  // "structured" or "coefficient"
  double reconstruction_error = 0;
  MultiIndex degree1, degree2;

  bool phi1_constant() const { return degree1.is_zero(); }
  bool phi2_constant() const { return degree2.is_zero(); }
};

namespace detail {

struct FlatProduct {
  MultiIndex exponent;
  Scalar scalar = GaussianRational(1);
  std::vector<BlaschkeFactor> conjugated, analytic;
};

// Flattens nested products/conjugates into scalar * z^exponent * Blaschke
// factors; false when a node (sum, multi-term Laurent) does not fit.
inline bool flatten_product(const SymbolExpr& s, bool conjugated, FlatProduct& out) {
  auto add_term = [&](const MultiIndex& k, const Scalar& c) {
    out.exponent = out.exponent + (conjugated ? -k : k);
    out.scalar = out.scalar * (conjugated ? conj(c) : c);
  };
  return std::visit(overloaded{
                        [&](const node::Constant& c) {
                          add_term(MultiIndex(s.vars()), c.value);
                          return true;
                        },
                        [&](const node::Monomial& m) {
                          add_term(m.k, GaussianRational(1));
                          return true;
                        },
                        [&](const node::Blaschke& b) {
                          (conjugated ? out.conjugated : out.analytic).push_back(b.factor);
                          return true;
                        },
                        [&](const node::Conj& c) { return flatten_product(c.arg, !conjugated, out); },
                        [&](const node::Product& p) {
                          for (const auto& f : p.factors)
                            if (!flatten_product(f, conjugated, out)) return false;
                          return true;
                        },
                        [&](const node::Sum&) { return false; },
                        [&](const node::Laurent& l) {
                          if (l.poly.size() != 1) return false;
                          const auto& [k, c] = *l.poly.terms().begin();
                          add_term(k, c);
                          return true;
                        },
                    },
                    s.node().v);
}

inline SymbolExpr inner_product_symbol(std::size_t n, const MultiIndex& exponent,
                                       const std::vector<BlaschkeFactor>& factors) {
  std::vector<SymbolExpr> parts;
  if (!exponent.is_zero()) parts.push_back(sym::monomial(exponent));
  for (const auto& b : factors) parts.push_back(sym::blaschke(n, b.var, b.zero));
  if (parts.empty()) return sym::constant(n, GaussianRational(1));
  if (parts.size() == 1) return parts.front();
  return sym::product(std::move(parts));
}

inline std::optional<FactorizationResult> structured_split(const SymbolExpr& phi) {
  const std::size_t n = phi.vars();
  FlatProduct flat{MultiIndex(n), GaussianRational(1), {}, {}};
  if (!flatten_product(phi, false, flat)) return std::nullopt;
  MultiIndex alpha(n), beta(n);
  for (std::size_t i = 0; i < n; ++i) {
    alpha[i] = std::max(-flat.exponent[i], 0);
    beta[i] = std::max(flat.exponent[i], 0);
  }
  MultiIndex deg1 = alpha, deg2 = beta;
  for (const auto& b : flat.conjugated) ++deg1[b.var];
  for (const auto& b : flat.analytic) ++deg2[b.var];
  for (std::size_t i = 0; i < n; ++i)
    if (deg1[i] > 0 && deg2[i] > 0) return std::nullopt;
  FactorizationResult r{inner_product_symbol(n, alpha, flat.conjugated),
                        inner_product_symbol(n, beta, flat.analytic),
                        flat.scalar,
                        "structured",
                        0,
                        deg1,
                        deg2};
  return r;
}

// Leading coefficient = coefficient of the lexicographically smallest exponent.
inline const GaussianRational& leading(const LaurentPoly& p) { return p.terms().begin()->second; }

inline FactorizationResult coefficient_split(const LaurentPoly& p, const VariableClassification& vc) {
  const std::size_t n = p.vars();
  const auto cvars = vc.vars_with(VarTag::COANALYTIC);
  // Slices phi_{A,k}: group terms by the (negated) co-analytic exponent k.
  std::map<MultiIndex, LaurentPoly::Terms> slices;
  for (const auto& [e, c] : p.terms()) {
    MultiIndex kc(n), ka = e;
    for (auto i : cvars) {
      kc[i] = -e[i];
      ka[i] = 0;
    }
    slices[kc].emplace(ka, c);
  }
  if (slices.empty()) throw not_partial_isometry("zero symbol has no inner factorization");
  // Reference slice: lexicographically smallest k (phi_{A,0} when present).
  const LaurentPoly ref(n, slices.begin()->second);
  const GaussianRational lambda = leading(ref);
  const LaurentPoly psi0 = (GaussianRational(1) / lambda) * ref;
  LaurentPoly::Terms phi1_terms;
  for (const auto& [k, terms] : slices) {
    const LaurentPoly slice(n, terms);
    const GaussianRational beta = leading(slice);
    if (!(slice == beta * psi0))
      throw not_partial_isometry("slice " + k.to_string() + " is not a scalar multiple of the reference slice");
    phi1_terms.emplace(k, beta.conj());
  }
  const LaurentPoly phi1_raw(n, std::move(phi1_terms));
  const GaussianRational mu = leading(phi1_raw);
  const LaurentPoly phi1 = (GaussianRational(1) / mu) * phi1_raw;
  const GaussianRational scalar = mu.conj();
  if (!(scalar * (conj_torus(phi1) * psi0) == p)) throw numeric_failure("exact reconstruction of the factorization failed");
  MultiIndex deg1(n), deg2(n);
  for (const auto& [k, c] : phi1.terms())
    for (std::size_t i = 0; i < n; ++i) deg1[i] = std::max(deg1[i], k[i]);
  for (const auto& [k, c] : psi0.terms())
    for (std::size_t i = 0; i < n; ++i) deg2[i] = std::max(deg2[i], k[i]);
  return {sym::laurent(phi1), sym::laurent(psi0), scalar, "coefficient", 0, deg1, deg2};
}

}  // namespace detail

/// Inner factorization phi = scalar * conj(phi1) * phi2. Gate: phi must be
/// unimodular and no variable may be MIXED. Structured inputs are split
/// syntactically (Blaschke factors kept in the standard form); exact inputs
/// that are not syntactic products go through the coefficient-slice
/// construction, normalized to leading coefficient 1.
inline FactorizationResult factorize(const SymbolExpr& phi, double eps, int grid_m = 64) {
  if (!(eps > 0)) throw invalid_input("eps must be positive");
  const CheckReport uni = check_unimodular(phi, grid_m);
  if (uni.verdict != Verdict::PASS) throw not_partial_isometry("symbol is not unimodular");
  const VariableClassification vc = classify_variables(phi, eps);
  for (std::size_t i = 0; i < vc.tags.size(); ++i)
    if (vc.tags[i] == VarTag::MIXED)
      throw not_partial_isometry("symbol depends on both z_" + std::to_string(i + 1) + " and its conjugate");

  std::optional<FactorizationResult> res = detail::structured_split(phi);
  if (!res) {
    if (!is_exact(phi)) throw not_partial_isometry("numeric symbol is not a product of inner factors and conjugates");
    res = detail::coefficient_split(to_laurent(phi), vc);
  }
  const SymbolExpr rebuilt =
      sym::product({sym::constant(phi.vars(), res->scalar), sym::conj(res->phi1), res->phi2});
  if (is_exact(phi) && is_exact(rebuilt)) {
    if (!(to_laurent(rebuilt) == to_laurent(phi))) throw numeric_failure("factorization does not reconstruct the input");
  } else {
    const IndexBox box = IndexBox::symmetric(MultiIndex::filled(phi.vars(), 8));
    const TruncatedSeries a = expand(phi, box, eps), b = expand(rebuilt, box, eps);
    double worst = 0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) worst = std::max(worst, std::abs(a.coeffs[i] - b.coeffs[i]));
    res->reconstruction_error = worst;
    if (worst > 2 * eps + a.err_l1 + b.err_l1) throw numeric_failure("factorization does not reconstruct the input");
  }
  return *res;
}

/// Halmos-Wallen decomposition of a finite power partial isometry:
/// unitary part plus truncated shifts, with chains v, Vv, ..., V^{p-1} v laid
/// out contiguously (unitary block first, then blocks by ascending p).
struct HWDecomposition {
  Eigen::Index unitary_dim = 0;
  std::map<int, int> blocks;  // index p -> multiplicity m_p
  ComplexMatrix basis_change;
  ComplexMatrix unitary_block;
  double model_residual = 0;
  double orthonormality_error = 0;
  double rank_tol = 0;
  double model_tol = 0;
  std::string note = "finite dimension: shift and co-shift parts are empty";
};

/// Unitary block followed by truncated shifts (ones below the diagonal).
inline ComplexMatrix canonical_model(const HWDecomposition& hw) {
  Eigen::Index dim = hw.unitary_dim;
  for (const auto& [p, m] : hw.blocks) dim += static_cast<Eigen::Index>(p) * m;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  out.topLeftCorner(hw.unitary_dim, hw.unitary_dim) = hw.unitary_block;
  Eigen::Index at = hw.unitary_dim;
  for (const auto& [p, m] : hw.blocks)
    for (int c = 0; c < m; ++c) {
      for (int j = 0; j + 1 < p; ++j) out(at + j + 1, at + j) = 1.0;
      at += p;
    }
  return out;
}

inline HWDecomposition hw_decompose(const ComplexMatrix& V, double rank_tol, double model_tol) {
  if (V.rows() != V.cols() || V.rows() == 0) throw invalid_input("hw_decompose needs a nonempty square matrix");
  if (!(rank_tol > 0) || !(model_tol > 0)) throw invalid_input("tolerances must be positive");
  detail::require_finite(V);
  const Eigen::Index n = V.rows();

  // Power ladder: check each V^m is a partial isometry and intersect the
  // ranges of E_m and F_m until the rank stabilizes.
  ComplexMatrix power = V;
  Subspace hu{n, ComplexMatrix::Identity(n, n), rank_tol};
  for (Eigen::Index m = 1; m <= n; ++m) {
    const double pi = operator_norm(power * power.adjoint() * power - power);
    if (pi > model_tol)
      throw not_partial_isometry("V^" + std::to_string(m) + " is not a partial isometry (residual " +
                                 std::to_string(pi) + ")");
    const Eigen::Index before = hu.rank();
    hu = subspace_intersect(hu, range_space(power.adjoint() * power, rank_tol), rank_tol);
    hu = subspace_intersect(hu, range_space(power * power.adjoint(), rank_tol), rank_tol);
    const bool nilpotent = operator_norm(power) <= rank_tol;
    if (hu.rank() == before && m > 1) break;
    if (nilpotent) break;
    power = power * V;
  }

  HWDecomposition hw;
  hw.rank_tol = rank_tol;
  hw.model_tol = model_tol;
  hw.unitary_dim = hu.rank();

  // Heads: ker V^* inside the complement of the unitary part.
  ComplexMatrix stacked(n + hu.rank(), n);
  stacked << V.adjoint(), hu.basis.adjoint();
  const Subspace heads = null_space(stacked, rank_tol);
  const Eigen::Index a = heads.rank();

  // Filtration A_p = {v in heads : V^p v = 0}; layer p = A_p minus A_{p-1}.
  std::vector<std::pair<int, ComplexMatrix>> layers;  // (p, heads of chains of length p)
  ComplexMatrix prev(a, 0);
  power = V;
  for (Eigen::Index p = 1; p <= n && prev.cols() < a; ++p) {
    const Subspace ap = null_space(power * heads.basis, rank_tol);
    if (ap.rank() > prev.cols()) {
      ComplexMatrix fresh = ap.basis;
      if (prev.cols() > 0) fresh -= prev * (prev.adjoint() * fresh);
      const Subspace layer = orthonormalize(fresh, std::sqrt(rank_tol));
      if (layer.rank() != ap.rank() - prev.cols())
        throw numeric_failure("head filtration is not nested at p = " + std::to_string(p));
      layers.emplace_back(static_cast<int>(p), heads.basis * layer.basis);
      hw.blocks[static_cast<int>(p)] = static_cast<int>(layer.rank());
    }
    prev = ap.basis;
    power = power * V;
  }
  if (prev.cols() < a) throw numeric_failure("some head vectors are not nilpotent under V");

  Eigen::Index total = hw.unitary_dim;
  for (const auto& [p, m] : hw.blocks) total += static_cast<Eigen::Index>(p) * m;
  if (total != n)
    throw numeric_failure("dimension count mismatch: unitary + chains = " + std::to_string(total) + ", ambient " +
                          std::to_string(n));

  ComplexMatrix q(n, n);
  q.leftCols(hw.unitary_dim) = hu.basis;
  Eigen::Index at = hw.unitary_dim;
  for (const auto& [p, hs] : layers)
    for (Eigen::Index c = 0; c < hs.cols(); ++c) {
      ComplexVector v = hs.col(c);
      for (int j = 0; j < p; ++j) {
        q.col(at++) = v;
        v = V * v;
      }
    }
  const ComplexMatrix gram = q.adjoint() * q;
  Eigen::Index bi = 0, bj = 0;
  hw.orthonormality_error = (gram - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff(&bi, &bj);
  if (hw.orthonormality_error > 1e-9)
    throw numeric_failure("chain vectors " + std::to_string(bi) + " and " + std::to_string(bj) +
                          " are not orthonormal (error " + std::to_string(hw.orthonormality_error) + ")");
  hw.basis_change = q;
  hw.unitary_block = hu.basis.adjoint() * V * hu.basis;
  hw.model_residual = operator_norm(q.adjoint() * V * q - canonical_model(hw));
  if (hw.model_residual > model_tol)
    throw numeric_failure("model residual " + std::to_string(hw.model_residual) + " exceeds model_tol");
  return hw;
}

enum class OperatorClass { SHIFT, CO_SHIFT, TRUNCATED_SHIFT_SUM, NOT_PARTIAL_ISOMETRY, INCONCLUSIVE, UNITARY_SCALAR };

inline const char* to_string(OperatorClass c) {
  switch (c) {
    case OperatorClass::SHIFT: return "SHIFT";
    case OperatorClass::CO_SHIFT: return "CO_SHIFT";
    case OperatorClass::TRUNCATED_SHIFT_SUM: return "TRUNCATED_SHIFT_SUM";
    case OperatorClass::NOT_PARTIAL_ISOMETRY: return "NOT_PARTIAL_ISOMETRY";
    case OperatorClass::INCONCLUSIVE: return "INCONCLUSIVE";
    case OperatorClass::UNITARY_SCALAR: return "UNITARY_SCALAR";
  }
  return "?";
}

struct ClassifyParams {
  DegreeBox d = DegreeBox::cube(1, 3);
  DegreeBox D = DegreeBox::cube(1, 24);
  double eps = 1e-10;
  Tolerances tol;
  double rank_tol = 1e-8;
  double model_tol = 1e-8;
  int grid_m = 64;
  int max_m = 20;
};

struct Classification {
  OperatorClass kind = OperatorClass::INCONCLUSIVE;
  CheckReport partial_isometry;
  std::optional<FactorizationResult> factorization;
  std::optional<HWDecomposition> decomposition;  // TRUNCATED_SHIFT_SUM evidence
  std::optional<DecayResult> decay;              // SHIFT / CO_SHIFT evidence, f = 1
  std::string note;
};

/// Partial-isometry check, then factorization, then the trichotomy.
/// Truncated-shift evidence is the decomposition of the d-compression of the
/// monomial model conj(z)^{deg phi1} z^{deg phi2}, which is unitarily
/// equivalent to T_phi (a Blaschke factor of multiplicity k acts like z^k).
inline Classification classify_operator(const SymbolExpr& phi, const ClassifyParams& params) {
  Classification out;
  out.partial_isometry = check_partial_isometry(phi, params.d, params.D, params.eps, params.tol);
  if (out.partial_isometry.verdict == Verdict::FAIL) {
    out.kind = OperatorClass::NOT_PARTIAL_ISOMETRY;
    out.note = "T_phi T_phi^* T_phi != T_phi";
    return out;
  }
  if (out.partial_isometry.verdict == Verdict::INCONCLUSIVE) {
    out.note = "partial isometry check was inconclusive";
    return out;
  }
  try {
    out.factorization = factorize(phi, params.eps, params.grid_m);
  } catch (const not_partial_isometry& e) {
    out.kind = OperatorClass::NOT_PARTIAL_ISOMETRY;
    out.note = e.what();
    return out;
  }
  const FactorizationResult& f = *out.factorization;
  const std::size_t n = phi.vars();
  const LaurentPoly one = LaurentPoly::constant(n, 1);
  if (f.phi1_constant() && f.phi2_constant()) {
    out.kind = OperatorClass::UNITARY_SCALAR;
    out.note = "constant unimodular symbol: T_phi is a scalar multiple of the identity";
  } else if (f.phi1_constant()) {
    out.kind = OperatorClass::SHIFT;
    out.decay = shift_decay(phi, one, params.max_m, params.eps);
    out.note = "analytic inner symbol: T_phi is a shift; decay is ||T_phi^{*m} 1||";
  } else if (f.phi2_constant()) {
    out.kind = OperatorClass::CO_SHIFT;
    out.decay = shift_decay(sym::conj(phi), one, params.max_m, params.eps);
    out.note = "co-analytic inner symbol: T_phi^* is a shift; decay is ||T_phi^m 1||";
  } else {
    out.kind = OperatorClass::TRUNCATED_SHIFT_SUM;
    const SymbolExpr model = sym::monomial(f.degree2 - f.degree1);
    out.decomposition = hw_decompose(compression(model, params.d, params.eps).M, params.rank_tol, params.model_tol);
    out.note = "both inner factors nonconstant: T_phi is a direct sum of truncated shifts";
  }
  return out;
}

}  // namespace polytoep
