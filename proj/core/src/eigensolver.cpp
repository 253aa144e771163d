#include "stripeforge/eigensolver.hpp"

#include "stripeforge/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace stripeforge::eigen {

double matrix_norm(const SparseMat& A) {
  VecX rows = VecX::Zero(A.rows());
  for (int c = 0; c < A.outerSize(); ++c) {
    for (SparseMat::InnerIterator it(A, c); it; ++it) rows[it.row()] += std::abs(it.value());
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

namespace {

bool is_diagonal(const SparseMat& B) {
  for (int c = 0; c < B.outerSize(); ++c) {
    for (SparseMat::InnerIterator it(B, c); it; ++it) {
      if (it.row() != it.col() && it.value() != 0.0) return false;
    }
  }
  return true;
}

GenEigResult dense_solve(const SparseMat& A, const SparseMat& B, int count) {
  GenEigResult out;
  out.dense = true;
  if (is_diagonal(B)) {
    // congruence with B^-1/2 keeps everything symmetric and well scaled
    const VecX d = VecX(B.diagonal());
    if (d.minCoeff() <= 0.0) throw SolverError("mass matrix is not positive definite");
    const VecX s = d.cwiseSqrt().cwiseInverse();
    MatX C = s.asDiagonal() * MatX(A) * s.asDiagonal();
    C = 0.5 * (C + C.transpose());
    Eigen::SelfAdjointEigenSolver<MatX> es(C);
    if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
    out.values = es.eigenvalues().head(count);
    out.vectors = s.asDiagonal() * es.eigenvectors().leftCols(count);
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<MatX> es{MatX(A), MatX(B)};
    if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed");
    out.values = es.eigenvalues().head(count);
    out.vectors = es.eigenvectors().leftCols(count);
  }
  return out;
}

// B-orthonormalize columns of X in place (two passes of modified Gram-Schmidt).
void b_orthonormalize(MatX& X, const SparseMat& B) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int c = 0; c < X.cols(); ++c) {
      for (int p = 0; p < c; ++p) {
        const double proj = X.col(p).dot(B * X.col(c));
        X.col(c) -= proj * X.col(p);
      }
      const double nrm = std::sqrt(std::max(X.col(c).dot(B * X.col(c)), 0.0));
      if (nrm < 1e-300) throw SolverError("subspace iteration lost rank");
      X.col(c) /= nrm;
    }
  }
}

GenEigResult subspace_solve(const SparseMat& A, const SparseMat& B, int count, const EigenSolverOptions& opts) {
  const int n = static_cast<int>(A.rows());
  const int m = std::min(n, std::max(opts.block_size, count + 2));
  const double anorm = std::max(matrix_norm(A), 1e-300);
  const double bscale = B.diagonal().cwiseAbs().mean();
  // shift slightly below zero so A - sB is SPD for a PSD A
  const double sigma = -1e-6 * anorm / std::max(bscale, 1e-300);
  SparseMat K = A - sigma * B;
  Eigen::SimplicialLDLT<SparseMat> ldlt(K);
  if (ldlt.info() != Eigen::Success) throw SolverError("shift-invert factorization failed");

  // deterministic start block
  MatX Q(n, m);
  for (int c = 0; c < m; ++c) {
    for (int r = 0; r < n; ++r) Q(r, c) = std::sin(1.0 + 0.7 * r * (c + 1) + 0.31 * c);
  }
  b_orthonormalize(Q, B);

  GenEigResult out;
  out.dense = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    MatX X = ldlt.solve(B * Q);
    b_orthonormalize(X, B);
    const MatX AX = A * X;
    MatX Ar = X.transpose() * AX;
    Ar = 0.5 * (Ar + Ar.transpose());
    Eigen::SelfAdjointEigenSolver<MatX> es(Ar);
    Q = X * es.eigenvectors();
    b_orthonormalize(Q, B);
    VecX lam = es.eigenvalues();
    double worst = 0.0;
    for (int c = 0; c < count; ++c) {
      const VecX r = A * Q.col(c) - lam[c] * (B * Q.col(c));
      worst = std::max(worst, r.norm() / anorm);
    }
    if (worst <= opts.tolerance) {
      out.values = lam.head(count);
      out.vectors = Q.leftCols(count);
      out.iterations = it;
      return out;
    }
  }
  throw SolverError("shift-invert eigensolver did not converge");
}

}  // namespace

GenEigResult smallest_eigenpairs(const SparseMat& A, const SparseMat& B, int count, const EigenSolverOptions& opts) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) throw ValidationError("eigenproblem dimension mismatch");
  if (count < 1 || count > A.rows()) throw ValidationError("invalid eigenpair count");
  if (A.rows() <= opts.dense_limit) return dense_solve(A, B, count);
  return subspace_solve(A, B, count, opts);
}

}  // namespace stripeforge::eigen
