#include <gtest/gtest.h>

#include <random>

#include "polytoep/series.hpp"
#include "polytoep/symbol.hpp"

using namespace polytoep;

namespace {

GaussianRational q(long a, long b = 1) { return GaussianRational(mpq_class(a, b)); }

std::complex<double> torus_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> th(0, 2 * std::numbers::pi);
  return std::polar(1.0, th(rng));
}

}  // namespace

TEST(Symbol, ToLaurentOfExactTree) {
  const SymbolExpr phi = sym::product({sym::monomial({-1, 1}), sym::constant(2, GaussianRational::i())});
  EXPECT_TRUE(is_exact(phi));
  EXPECT_EQ(to_laurent(phi), LaurentPoly::monomial({-1, 1}, GaussianRational::i()));
  const SymbolExpr s = sym::sum({sym::monomial({1, 0}), sym::conj(sym::monomial({0, 1}))});
  EXPECT_EQ(to_laurent(s), LaurentPoly::monomial({1, 0}) + LaurentPoly::monomial({0, -1}));
}

TEST(Symbol, BlaschkeIsNotExact) {
  const SymbolExpr b = sym::blaschke(1, 0, q(1, 2));
  EXPECT_FALSE(is_exact(b));
  EXPECT_THROW(to_laurent(b), invalid_input);
}

TEST(Symbol, RejectsBadBlaschkeZero) {
  EXPECT_THROW(sym::blaschke(1, 0, q(1)), invalid_input);
  EXPECT_THROW(sym::blaschke(1, 0, std::complex<double>(0.8, 0.7)), invalid_input);
  EXPECT_THROW(sym::blaschke(2, 2, q(0)), invalid_input);
}

TEST(Series, BlaschkeClosedForm) {
  // c_0 = -a, c_k = conj(a)^(k-1) (1 - |a|^2).
  const std::complex<double> a(0.3, -0.4);
  const SymbolExpr b = sym::blaschke(1, 0, a);
  const TruncatedSeries ts = expand(b, IndexBox::symmetric({12}), 1e-13);
  EXPECT_LE(ts.err_l1, 1e-13);
  EXPECT_NEAR(std::abs(ts.at({0}) + a), 0, 1e-13);
  for (int k = 1; k <= 12; ++k) {
    const std::complex<double> want = std::pow(std::conj(a), k - 1) * (1.0 - std::norm(a));
    EXPECT_NEAR(std::abs(ts.at({k}) - want), 0, 1e-13) << k;
    EXPECT_EQ(ts.at({-k}), std::complex<double>{}) << k;
  }
}

TEST(Series, BlaschkeExactZeroHalf) {
  const SymbolExpr b = sym::blaschke(1, 0, q(1, 2));
  const CoeffEstimate c0 = coeff(b, {0}, 1e-14), c2 = coeff(b, {2}, 1e-14);
  EXPECT_NEAR(std::abs(c0.value - (-0.5)), 0, 1e-14);
  EXPECT_NEAR(std::abs(c2.value - 0.375), 0, 1e-14);
}

TEST(Series, CoefficientMatchesLaurentOnExactSymbols) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> e(-3, 3), v(-5, 5);
  for (int t = 0; t < 50; ++t) {
    LaurentPoly::Terms terms;
    for (int j = 0; j < 5; ++j) terms[MultiIndex{e(rng), e(rng)}] += GaussianRational(mpq_class(v(rng), 3), v(rng));
    const LaurentPoly p(2, terms);
    const SymbolExpr s = sym::product({sym::laurent(p), sym::conj(sym::monomial({1, -1}))});
    const LaurentPoly ref = to_laurent(s);
    for (int i = -4; i <= 4; ++i)
      for (int j = -4; j <= 4; ++j) {
        const CoeffEstimate c = coeff(s, {i, j}, 1e-12);
        EXPECT_NEAR(std::abs(c.value - ref.coeff({i, j}).to_complex()), 0, 1e-12);
        EXPECT_EQ(coeff_exact(s, {i, j}), ref.coeff({i, j}));
      }
  }
}

TEST(Series, ProductOfBlaschkeFactorsIsUnimodular) {
  std::mt19937_64 rng(22);
  const SymbolExpr phi = sym::product({sym::blaschke(2, 0, std::complex<double>(0.5, 0.2)),
                                       sym::conj(sym::blaschke(2, 1, q(-1, 3))), sym::monomial({0, 2})});
  for (int t = 0; t < 100; ++t) {
    const std::complex<double> w[] = {torus_point(rng), torus_point(rng)};
    EXPECT_NEAR(std::abs(evaluate(phi, w)), 1.0, 1e-13);
  }
}

TEST(Series, ErrorBoundCoversReference) {
  // Tight eps against a loose one: the reported errors must cover the gap.
  const SymbolExpr phi = sym::sum({sym::blaschke(1, 0, std::complex<double>(0.9, 0)), sym::monomial({-2})});
  const TruncatedSeries loose = expand(phi, IndexBox::symmetric({20}), 1e-4);
  const TruncatedSeries tight = expand(phi, IndexBox::symmetric({20}), 1e-13);
  for (int k = -20; k <= 20; ++k)
    EXPECT_LE(std::abs(loose.at({k}) - tight.at({k})), loose.err_l1 + tight.err_l1 + 1e-15) << k;
  EXPECT_LE(loose.err_l1, 1e-4);
}

TEST(Series, RoundingFloorIsReported) {
  EXPECT_THROW(expand(sym::blaschke(1, 0, GaussianRational(mpq_class(1, 3))), IndexBox::symmetric({4}), 1e-18),
               budget_exceeded);
}

TEST(Series, BudgetIsEnforced) {
  const SymbolExpr phi = sym::blaschke(3, 0, q(1, 2));
  ExpansionBudget tiny{100};
  EXPECT_THROW(expand(phi, IndexBox::symmetric({10, 10, 10}), 1e-10, tiny), budget_exceeded);
}

TEST(SupNorm, BracketContainsKnownValues) {
  const SymbolExpr s = sym::laurent(LaurentPoly::monomial({1, 0}) + LaurentPoly::monomial({0, 1}));
  for (int m : {8, 32, 128}) {
    const SupNormBounds b = sup_norm_bounds(s, m);
    EXPECT_LE(b.lower, 2.0 + 1e-12);
    EXPECT_GE(b.upper, 2.0 - 1e-12);
  }
  const SupNormBounds one = sup_norm_bounds(sym::blaschke(1, 0, q(1, 2)), 64);
  EXPECT_LE(one.lower, 1.0 + 1e-12);
  EXPECT_GE(one.upper, 1.0 - 1e-12);
}

TEST(SupNorm, BracketShrinksWithGrid) {
  const SymbolExpr s = sym::laurent(LaurentPoly::monomial({1, 0}) + LaurentPoly::monomial({0, -3}) +
                                    LaurentPoly::constant(2, GaussianRational::i()));
  const SupNormBounds a = sup_norm_bounds(s, 16), b = sup_norm_bounds(s, 64);
  EXPECT_LE(b.upper - b.lower, a.upper - a.lower);
  EXPECT_GE(b.lower, a.lower);
}
