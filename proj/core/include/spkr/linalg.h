// spkr/linalg.h

// Copyright 2026  The spkr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SPKR_LINALG_H_
#define SPKR_LINALG_H_

#include <cstddef>
#include <span>

#include "spkr/matrix.h"

namespace spkr {

/// Eigenpairs sorted by descending eigenvalue. Column i of `vectors` is the
/// unit-norm eigenvector for values[i]; its largest-magnitude component is
/// positive (first such component on ties), so results are deterministic.
struct EigenResult {
  Vector values;
  Matrix vectors;
};

inline constexpr int kMaxJacobiSweeps = 100;
inline constexpr std::size_t kMaxEigenDim = 512;
inline constexpr double kSymmetryTolerance = 1e-8;
inline constexpr double kMaxPencilCondition = 1e12;

// Unnormalized scatter A*A^T, where A is `data` with `mean` subtracted from
// every column. Throws ArgumentError on a dimension mismatch.
Matrix Covariance(const Matrix &data, std::span<const double> mean);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// The input must be symmetric to within kSymmetryTolerance relative to its
/// largest entry (ArgumentError otherwise); the symmetric part is used.
/// Exceeding kMaxJacobiSweeps throws NumericError rather than returning a
/// partially diagonalized result.
EigenResult SymEigendecomp(const Matrix &m);

/// Generalized symmetric-definite problem S_B w = lambda (S_W + ridge I) w.
///
/// The regularized S_W is whitened through its own eigendecomposition, which
/// also yields its condition number; above kMaxPencilCondition (or when it is
/// not positive definite) a NumericError asks the caller to raise the ridge.
/// Returned eigenvectors are scaled to unit Euclidean norm and sign
/// canonicalized like SymEigendecomp.
EigenResult SolveGeneralizedEig(const Matrix &s_b, const Matrix &s_w, double ridge);

// Flips the sign of each column so its largest-magnitude entry is positive.
void CanonicalizeSigns(Matrix *vectors);

}  // namespace spkr

#endif  // SPKR_LINALG_H_
