#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

#include "polytoep/errors.hpp"

namespace polytoep {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Finite-dimensional subspace given by an orthonormal basis.
struct Subspace {
  Eigen::Index ambient_dim = 0;
  ComplexMatrix basis;  // ambient_dim x rank, orthonormal columns
  double rank_tol = 1e-8;

  Eigen::Index rank() const { return basis.cols(); }
  ComplexMatrix projector() const { return basis * basis.adjoint(); }
};

struct MinEigenpair {
  double value = 0;
  ComplexVector vector;
};

namespace detail {
inline void require_finite(const ComplexMatrix& m) {
  if (!m.allFinite()) throw invalid_input("matrix has non-finite entries");
}
}  // namespace detail

/// Smallest eigenvalue of a Hermitian matrix and a unit eigenvector. Dense
/// self-adjoint solver; accurate to a few ulps of ||M||, which meets any
/// `tol` above that level.
inline MinEigenpair hermitian_min_eig_pair(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) throw invalid_input("hermitian_min_eig needs a nonempty square matrix");
  if (!(tol > 0)) throw invalid_input("tol must be positive");
  detail::require_finite(m);
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (asym > 1e-10 * scale) throw invalid_input("matrix is not Hermitian");
  const ComplexMatrix h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  if (es.info() != Eigen::Success) throw numeric_failure("eigenvalue iteration failed");
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

inline double hermitian_min_eig(const ComplexMatrix& m, double tol) { return hermitian_min_eig_pair(m, tol).value; }

/// Largest singular value.
inline double operator_norm(const ComplexMatrix& m, double tol = 1e-12) {
  if (!(tol > 0)) throw invalid_input("tol must be positive");
  if (m.size() == 0) return 0.0;
  detail::require_finite(m);
  if (std::min(m.rows(), m.cols()) <= 64) {
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    return svd.singularValues()(0);
  }
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  if (svd.info() != Eigen::Success) throw numeric_failure("SVD failed");
  return svd.singularValues()(0);
}

/// Orthonormal basis of the column span by two-pass modified Gram-Schmidt.
/// A column whose residual after projection has norm <= rank_tol is dropped.
inline Subspace orthonormalize(const ComplexMatrix& vectors, double rank_tol) {
  if (!(rank_tol > 0)) throw invalid_input("rank_tol must be positive");
  detail::require_finite(vectors);
  const Eigen::Index dim = vectors.rows();
  ComplexMatrix q(dim, vectors.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    ComplexVector v = vectors.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < kept; ++i) v -= q.col(i) * q.col(i).dot(v);
    const double r = v.norm();
    if (r <= rank_tol) continue;
    q.col(kept++) = v / r;
  }
  return {dim, q.leftCols(kept), rank_tol};
}

/// Numerical intersection: directions whose principal-angle cosine between
/// the two subspaces is at least 1 - rank_tol (singular values of P_A P_B).
inline Subspace subspace_intersect(const Subspace& a, const Subspace& b, double rank_tol) {
  if (a.ambient_dim != b.ambient_dim) throw invalid_input("subspaces live in different ambient spaces");
  if (!(rank_tol > 0)) throw invalid_input("rank_tol must be positive");
  if (a.rank() == 0 || b.rank() == 0) return {a.ambient_dim, ComplexMatrix(a.ambient_dim, 0), rank_tol};
  const ComplexMatrix cross = a.basis.adjoint() * b.basis;
  Eigen::JacobiSVD<ComplexMatrix> svd(cross, Eigen::ComputeFullU);
  Eigen::Index k = 0;
  while (k < svd.singularValues().size() && svd.singularValues()(k) >= 1.0 - rank_tol) ++k;
  const ComplexMatrix basis = a.basis * svd.matrixU().leftCols(k);
  // Re-orthonormalize to remove the drift of the cosine-1 directions.
  return orthonormalize(basis, rank_tol);
}

/// Orthonormal basis of {x : M x ~ 0}, i.e. right singular vectors with
/// singular value <= rank_tol.
inline Subspace null_space(const ComplexMatrix& m, double rank_tol) {
  if (!(rank_tol > 0)) throw invalid_input("rank_tol must be positive");
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return {n, ComplexMatrix::Identity(n, n), rank_tol};
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > rank_tol) ++rank;
  return {n, svd.matrixV().rightCols(n - rank), rank_tol};
}

/// Orthogonal complement within the ambient space.
inline Subspace orthogonal_complement(const Subspace& s, double rank_tol) {
  if (s.rank() == 0)
    return {s.ambient_dim, ComplexMatrix::Identity(s.ambient_dim, s.ambient_dim), rank_tol};
  return null_space(s.basis.adjoint(), rank_tol);
}

/// Span of the columns of `m` (numerical range) via SVD.
inline Subspace range_space(const ComplexMatrix& m, double rank_tol) {
  if (!(rank_tol > 0)) throw invalid_input("rank_tol must be positive");
  if (m.cols() == 0) return {m.rows(), ComplexMatrix(m.rows(), 0), rank_tol};
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > rank_tol) ++rank;
  return {m.rows(), svd.matrixU().leftCols(rank), rank_tol};
}

}  // namespace polytoep
