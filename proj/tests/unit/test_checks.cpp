#include <gtest/gtest.h>

#include <random>

#include "polytoep/checks.hpp"

using namespace polytoep;

namespace {

const GaussianRational kUnits[] = {GaussianRational(1), GaussianRational::i(), GaussianRational(-1),
                                   GaussianRational(mpq_class(3, 5), mpq_class(4, 5)),
                                   GaussianRational(mpq_class(-5, 13), mpq_class(12, 13))};

void expect_verdict_rule(const CheckReport& r) {
  switch (r.verdict) {
    case Verdict::PASS: EXPECT_LE(r.residual, r.threshold_pass) << r.check; break;
    case Verdict::FAIL: EXPECT_GE(r.residual - r.leakage_bound, r.threshold_fail) << r.check; break;
    case Verdict::INCONCLUSIVE:
      EXPECT_GT(r.residual, r.threshold_pass) << r.check;
      EXPECT_LT(r.residual - r.leakage_bound, r.threshold_fail) << r.check;
      break;
  }
}

SymbolExpr mono(std::initializer_list<int> k, const GaussianRational& c = 1) {
  return sym::laurent(LaurentPoly::monomial(MultiIndex(k), c));
}

}  // namespace

TEST(Decide, VerdictRule) {
  EXPECT_EQ(decide(1e-9, 0, 1e-8, 1e-2), Verdict::PASS);
  EXPECT_EQ(decide(0.5, 0.1, 1e-8, 1e-2), Verdict::FAIL);
  EXPECT_EQ(decide(0.5, 0.495, 1e-8, 1e-2), Verdict::INCONCLUSIVE);
  EXPECT_EQ(decide(1e-5, 0, 1e-8, 1e-2), Verdict::INCONCLUSIVE);
}

TEST(ExactClass, MonomialsPassEveryCheck) {
  // c z^g with |c| = 1: unimodular, partial isometry and every power too.
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> e(-3, 3);
  const DegreeBox d({2, 2}), D({6, 6});
  for (int t = 0; t < 25; ++t) {
    const SymbolExpr phi = mono({e(rng), e(rng)}, kUnits[t % 5]);
    const CheckReport u = check_unimodular(phi, 16);
    EXPECT_EQ(u.verdict, Verdict::PASS);
    EXPECT_TRUE(u.exact);
    const CheckReport pi = check_partial_isometry(phi, d, D, 1e-10);
    EXPECT_EQ(pi.verdict, Verdict::PASS);
    EXPECT_TRUE(pi.exact);
    for (const auto& r : check_power_partial_isometry(phi, 3, d, D, 1e-10)) EXPECT_EQ(r.verdict, Verdict::PASS) << r.check;
    const CheckReport ri = check_range_invariance(to_laurent(phi), D);
    EXPECT_EQ(ri.verdict, Verdict::PASS);
  }
}

TEST(ExactClass, NonUnimodularFails) {
  const SymbolExpr sum = sym::laurent(LaurentPoly::monomial({1, 0}) + LaurentPoly::monomial({0, 1}));
  const CheckReport u = check_unimodular(sum, 16);
  EXPECT_EQ(u.verdict, Verdict::FAIL);
  EXPECT_TRUE(u.exact);
  ASSERT_TRUE(u.witness.has_value());
  EXPECT_EQ(u.witness->kind, Witness::Kind::torus_point);
  const CheckReport pi = check_partial_isometry(sum, DegreeBox({2, 2}), DegreeBox({6, 6}), 1e-10);
  EXPECT_EQ(pi.verdict, Verdict::FAIL);
  ASSERT_TRUE(pi.witness.has_value());
  EXPECT_EQ(pi.witness->kind, Witness::Kind::monomial);
}

TEST(VerdictInvariant, HoldsAcrossNumericChecks) {
  const SymbolExpr b = sym::blaschke(2, 0, std::complex<double>(0.5, 0.1));
  const SymbolExpr inner = sym::product({sym::conj(b), sym::blaschke(2, 1, std::complex<double>(-0.2, 0.3))});
  const SymbolExpr outer = sym::sum({b, sym::monomial({0, 1})});
  const DegreeBox d({2, 2}), D({16, 16});
  for (const SymbolExpr& s : {b, inner, outer}) {
    expect_verdict_rule(check_unimodular(s, 32));
    expect_verdict_rule(check_partial_isometry(s, d, D, 1e-12));
    expect_verdict_rule(check_hyponormal(s, d, D, 1e-12));
    for (const auto& r : check_power_partial_isometry(s, 2, d, D, 1e-12)) expect_verdict_rule(r);
  }
  EXPECT_EQ(check_partial_isometry(inner, d, D, 1e-12).verdict, Verdict::PASS);
  EXPECT_EQ(check_partial_isometry(outer, d, D, 1e-12).verdict, Verdict::FAIL);
}

TEST(Hyponormal, ShiftAndBackwardShift) {
  const DegreeBox d({3}), D({12});
  EXPECT_EQ(check_hyponormal(mono({1}), d, D, 1e-10).verdict, Verdict::PASS);
  const CheckReport back = check_hyponormal(mono({-1}), d, D, 1e-10);
  EXPECT_EQ(back.verdict, Verdict::FAIL);
  EXPECT_NEAR(back.metrics.at("min_eig"), -1.0, 1e-12);
  ASSERT_TRUE(back.witness.has_value());
  ASSERT_EQ(back.witness->vector.size(), 4u);
  EXPECT_NEAR(std::abs(back.witness->vector[0] - 1.0), 0, 1e-12);
}

TEST(Norm, SingleTermAttainsModulus) {
  const NormEstimate est = estimate_norm(mono({-1, 1}, kUnits[3]), {DegreeBox({1, 1}), DegreeBox({3, 3})}, 16, 1e-10);
  EXPECT_TRUE(est.attained);
  for (const auto& row : est.rows) EXPECT_NEAR(row.value, 1.0, 1e-14);
}

TEST(Norm, SumOfCoordinatesIsMonotoneBelowTwo) {
  const SymbolExpr s = sym::laurent(LaurentPoly::monomial({1, 0}) + LaurentPoly::monomial({0, 1}));
  const NormEstimate est = estimate_norm(s, {DegreeBox({2, 2}), DegreeBox({4, 4}), DegreeBox({8, 8})}, 64, 1e-10);
  EXPECT_TRUE(est.monotone);
  EXPECT_TRUE(est.within_upper);
  EXPECT_NEAR(est.rows[1].value, 1.902113032590307, 1e-12);
  for (const auto& row : est.rows) EXPECT_LE(row.value, 2.0);
}

TEST(Decay, ShiftDecaysToZero) {
  const DecayResult r = shift_decay(sym::blaschke(1, 0, GaussianRational(mpq_class(1, 2))),
                                    LaurentPoly::constant(1, 1), 12, 1e-14);
  ASSERT_EQ(r.norms.size(), 12u);
  EXPECT_TRUE(r.nonincreasing);
  for (int m = 1; m <= 12; ++m) EXPECT_NEAR(r.norms[m - 1], std::pow(0.5, m), 1e-12 + r.errors[m - 1]);
  const DecayResult z = shift_decay(mono({1}), LaurentPoly::monomial({3}), 5, 1e-10);
  EXPECT_TRUE(z.exact);
  EXPECT_EQ(z.norms, (std::vector<double>{1, 1, 1, 0, 0}));
  EXPECT_THROW(shift_decay(mono({-1}), LaurentPoly::constant(1, 1), 3, 1e-10), invalid_input);
}

TEST(Commutation, DisjointInnerSymbolsCommute) {
  const SymbolExpr b1 = sym::blaschke(2, 0, std::complex<double>(0.3, 0)),
                   b2 = sym::blaschke(2, 1, std::complex<double>(0, -0.4));
  const auto [c, a] = check_commutation(b1, b2, DegreeBox({2, 2}), DegreeBox({16, 16}), 1e-12);
  EXPECT_EQ(c.verdict, Verdict::PASS);
  EXPECT_EQ(a.verdict, Verdict::PASS);
  const auto [ce, ae] = check_commutation(mono({2, 0}), mono({0, 1}), DegreeBox({2, 2}), DegreeBox({6, 6}), 1e-12);
  EXPECT_TRUE(ce.exact);
  EXPECT_EQ(ce.residual, 0);
  EXPECT_EQ(ae.residual, 0);
  EXPECT_THROW(check_commutation(mono({1, 1}), mono({0, 1}), DegreeBox({2, 2}), DegreeBox({6, 6}), 1e-12),
               invalid_input);
}

TEST(FinalProjection, HoldsForInnerFactors) {
  const CheckReport r = check_final_projection(mono({1, 0}), mono({0, 2}), DegreeBox({3, 3}), DegreeBox({8, 8}), 1e-12);
  EXPECT_EQ(r.verdict, Verdict::PASS);
  EXPECT_TRUE(r.exact);
  const CheckReport n = check_final_projection(sym::blaschke(2, 0, std::complex<double>(0.5, 0)),
                                               sym::blaschke(2, 1, std::complex<double>(0.25, 0)), DegreeBox({2, 2}),
                                               DegreeBox({24, 24}), 1e-12);
  EXPECT_EQ(n.verdict, Verdict::PASS);
}

TEST(DoublyCommuting, Ideals) {
  const DegreeBox box({4, 4});
  EXPECT_EQ(check_doubly_commuting({{1, 1}}, box, 1).verdict, Verdict::PASS);
  const CheckReport coord = check_doubly_commuting({{1, 0}, {0, 1}}, box, 1);
  EXPECT_EQ(coord.verdict, Verdict::FAIL);
  EXPECT_EQ(coord.residual, 2);
  ASSERT_TRUE(coord.witness.has_value());
  EXPECT_EQ(coord.witness->index, (MultiIndex{0, 1}));
  EXPECT_EQ(check_doubly_commuting({{0, 0}}, box, 1).verdict, Verdict::PASS);
  EXPECT_THROW(check_doubly_commuting({{-1, 0}}, box, 1), invalid_input);
}
