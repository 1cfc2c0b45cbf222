#include <gtest/gtest.h>

#include <random>

#include "polytoep/toeplitz.hpp"

using namespace polytoep;

namespace {

LaurentPoly random_poly(std::mt19937_64& rng, std::size_t n, int terms, int radius) {
  std::uniform_int_distribution<int> e(-radius, radius), v(-4, 4);
  LaurentPoly::Terms t;
  for (int i = 0; i < terms; ++i) {
    MultiIndex k(n);
    for (std::size_t j = 0; j < n; ++j) k[j] = e(rng);
    t[k] += GaussianRational(mpq_class(v(rng), 2), mpq_class(v(rng), 3));
  }
  return LaurentPoly(n, std::move(t));
}

double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST(DegreeBox, LexicographicBasis) {
  const DegreeBox b({1, 2});
  ASSERT_EQ(b.dim(), 6u);
  EXPECT_EQ(b.at(0), (MultiIndex{0, 0}));
  EXPECT_EQ(b.at(1), (MultiIndex{0, 1}));
  EXPECT_EQ(b.at(3), (MultiIndex{1, 0}));
  EXPECT_EQ(b.index_of({1, 2}), 5u);
  EXPECT_THROW(DegreeBox({-1, 2}), invalid_input);
  EXPECT_TRUE(DegreeBox({1, 2}).inside(DegreeBox({1, 3})));
  EXPECT_FALSE(DegreeBox({2, 2}).inside(DegreeBox({1, 3})));
}

TEST(Compression, BlaschkeHalfCorner) {
  const CompressionMatrix c = compression(sym::blaschke(1, 0, GaussianRational(mpq_class(1, 2))), DegreeBox({2}), 1e-14);
  ComplexMatrix want(3, 3);
  want << -0.5, 0, 0, 0.75, -0.5, 0, 0.375, 0.75, -0.5;
  EXPECT_LE(max_abs(c.M - want), 1e-14);
  EXPECT_LE(c.entry_err, 1e-14);
}

TEST(Compression, MonomialShiftsBasis) {
  const CompressionMatrix c = compression(sym::monomial({-1, 1}), DegreeBox({2, 2}), 1e-12);
  const DegreeBox& b = c.box;
  for (std::size_t col = 0; col < b.dim(); ++col) {
    const MultiIndex k = b.at(col), img = k + MultiIndex{-1, 1};
    for (std::size_t row = 0; row < b.dim(); ++row) {
      const double want = b.at(row) == img ? 1.0 : 0.0;
      EXPECT_EQ(c.M(Eigen::Index(row), Eigen::Index(col)), std::complex<double>(want)) << row << "," << col;
    }
  }
}

TEST(CompressionProperties, EntriesDependOnDifferenceOnly) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 20; ++t) {
    const LaurentPoly p = random_poly(rng, 2, 6, 3);
    const DegreeBox box({3, 2});
    const ComplexMatrix m = compression(sym::laurent(p), box, 1e-12).M;
    for (std::size_t r = 0; r < box.dim(); ++r)
      for (std::size_t c = 0; c < box.dim(); ++c)
        EXPECT_NEAR(std::abs(m(Eigen::Index(r), Eigen::Index(c)) - p.coeff(box.at(r) - box.at(c)).to_complex()), 0,
                    1e-14);
  }
}

TEST(CompressionProperties, ConjugateSymbolGivesAdjoint) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 20; ++t) {
    const SymbolExpr s = sym::product({sym::laurent(random_poly(rng, 2, 4, 2)),
                                       sym::blaschke(2, t % 2, std::complex<double>(0.3, -0.1 * (t % 5)))});
    const DegreeBox box({3, 3});
    const CompressionMatrix a = compression(s, box, 1e-12), b = compression(sym::conj(s), box, 1e-12);
    EXPECT_LE(max_abs(a.M.adjoint() - b.M), a.entry_err + b.entry_err + 1e-14);
  }
}

TEST(ToeplitzApply, AnalyticSymbolIsMultiplication) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 30; ++t) {
    const LaurentPoly phi = analytic_project(random_poly(rng, 2, 5, 3));
    const LaurentPoly f = analytic_project(random_poly(rng, 2, 5, 3));
    EXPECT_EQ(toeplitz_apply_exact(phi, f), phi * f);
  }
  EXPECT_THROW(toeplitz_apply_exact(LaurentPoly::monomial({1}), LaurentPoly::monomial({-1})), invalid_input);
}

TEST(ToeplitzApply, AdjointIsConjugateSymbol) {
  // <T f, g> = <f, T_conj g> for polynomials f, g in H^2.
  std::mt19937_64 rng(44);
  for (int t = 0; t < 30; ++t) {
    const LaurentPoly phi = random_poly(rng, 2, 5, 3);
    const LaurentPoly f = analytic_project(random_poly(rng, 2, 6, 3));
    const LaurentPoly g = analytic_project(random_poly(rng, 2, 6, 3));
    EXPECT_EQ(inner_product(toeplitz_apply_exact(phi, f), g), inner_product(f, toeplitz_apply_exact(conj_torus(phi), g)));
  }
}

TEST(Gram, PositiveSemidefinite) {
  std::mt19937_64 rng(45);
  for (int t = 0; t < 10; ++t) {
    const LaurentPoly p = random_poly(rng, 2, 5, 2);
    for (GramKind kind : {GramKind::adjoint_first, GramKind::adjoint_second}) {
      const ComplexMatrix g = gram_compression(p, p, DegreeBox({2, 2}), kind);
      EXPECT_LE(max_abs(g - g.adjoint()), 0);
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g);
      EXPECT_GE(es.eigenvalues()(0), -1e-12 * (1 + g.norm()));
    }
  }
}

TEST(Gram, IsometricMonomialGivesIdentity) {
  // T_z^* T_z = I, but T_z T_z^* kills the constants.
  const LaurentPoly z = LaurentPoly::monomial({1, 0});
  const DegreeBox box({2, 2});
  EXPECT_LE(max_abs(gram_compression(z, z, box, GramKind::adjoint_first) - ComplexMatrix::Identity(9, 9)), 0);
  const ComplexMatrix tt = gram_compression(z, z, box, GramKind::adjoint_second);
  for (std::size_t i = 0; i < box.dim(); ++i)
    EXPECT_EQ(tt(Eigen::Index(i), Eigen::Index(i)), std::complex<double>(box.at(i)[0] > 0 ? 1.0 : 0.0));
}

TEST(Gram, MatchesWideCompressionProduct) {
  // Compressions on a box wide enough to contain every image are exact.
  std::mt19937_64 rng(46);
  const DegreeBox d({2, 2}), D({8, 8});
  for (int t = 0; t < 5; ++t) {
    const LaurentPoly p = random_poly(rng, 2, 4, 2), q = random_poly(rng, 2, 4, 2);
    const ComplexMatrix mp = compression(sym::laurent(p), D, 1e-12).M, mq = compression(sym::laurent(q), D, 1e-12).M;
    const ComplexMatrix wide = mq.adjoint() * mp;
    const ComplexMatrix g = gram_compression(p, q, d, GramKind::adjoint_first);
    for (std::size_t r = 0; r < d.dim(); ++r)
      for (std::size_t c = 0; c < d.dim(); ++c)
        EXPECT_NEAR(std::abs(g(Eigen::Index(r), Eigen::Index(c)) -
                             wide(Eigen::Index(D.index_of(d.at(r))), Eigen::Index(D.index_of(d.at(c))))),
                    0, 1e-12);
  }
}

TEST(Leakage, BoundCoversChangeOfOuterBox) {
  const SymbolExpr phi = sym::product({sym::blaschke(2, 0, std::complex<double>(0.6, 0.2)),
                                       sym::conj(sym::monomial({0, 1})),
                                       sym::laurent(LaurentPoly::monomial({0, 0}) + LaurentPoly::monomial({1, 0}))});
  const DegreeBox d({2, 2});
  const ToeplitzModel small = build_model(phi, DegreeBox({8, 8}), 1e-12), big = build_model(phi, DegreeBox({40, 40}), 1e-12);
  const Word w1 = {{&small, false}, {&small, true}, {&small, false}};
  const Word w2 = {{&big, false}, {&big, true}, {&big, false}};
  const double gap = operator_norm(corner_word(w1, d) - corner_word(w2, d));
  EXPECT_LE(gap, word_leakage(w1, d) + word_leakage(w2, d));
}

TEST(Leakage, PartialIsometryResidualForInnerSymbol) {
  const SymbolExpr phi = sym::product({sym::conj(sym::blaschke(2, 0, std::complex<double>(0.5, 0))),
                                       sym::blaschke(2, 1, std::complex<double>(0, 0.5))});
  const ResidualEstimate e = pi_residual(phi, DegreeBox({3, 3}), DegreeBox({32, 32}), 1e-12);
  EXPECT_LE(e.residual, 1e-12);
  EXPECT_LE(e.leakage_bound, 1e-6);
  EXPECT_THROW(pi_residual(phi, DegreeBox({3, 3}), DegreeBox({2, 8}), 1e-12), invalid_input);
}

TEST(ExactWord, AppliesRightmostFirst) {
  const LaurentPoly z1 = LaurentPoly::monomial({1, 0}), z2 = LaurentPoly::monomial({0, 1});
  const LaurentPoly one = LaurentPoly::constant(2, 1);
  // T_{z1}^* T_{z2} 1 = 0, T_{z2} T_{z1}^* z1 = z2.
  EXPECT_TRUE(apply_word_exact({{&z1, true}, {&z2, false}}, one).is_zero());
  EXPECT_EQ(apply_word_exact({{&z2, false}, {&z1, true}}, z1), z2);
}
