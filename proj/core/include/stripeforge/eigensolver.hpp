#pragma once

#include "stripeforge/types.hpp"

#include <string>

namespace stripeforge::eigen {

struct EigenSolverOptions {
  int dense_limit = 4000;  // use the dense solver up to this size
  int block_size = 8;      // subspace width for the iterative solver
  int max_iterations = 500;
  double tolerance = 1e-11;  // relative residual ||Av - lBv|| / ||A||
};

struct GenEigResult {
  VecX values;   // ascending
  MatX vectors;  // columns, B-orthonormal
  int iterations = 0;
  bool dense = true;
};

/// Smallest `count` eigenpairs of A v = l B v, A symmetric PSD, B SPD.
/// Dense for small systems, shift-invert block subspace iteration with
/// Rayleigh-Ritz otherwise. Throws SolverError on non-convergence.
GenEigResult smallest_eigenpairs(const SparseMat& A, const SparseMat& B, int count,
                                 const EigenSolverOptions& opts = {});

/// Frobenius-style scale of a sparse matrix (max absolute row sum).
double matrix_norm(const SparseMat& A);

}  // namespace stripeforge::eigen
