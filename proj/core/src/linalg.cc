// spkr/linalg.cc

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

#include "spkr/linalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spkr/errors.h"

namespace spkr {

namespace {

double MaxAbs(const Matrix &m) {
  double mx = 0.0;
  for (double v : m.values()) mx = std::max(mx, std::abs(v));
  return mx;
}

void CheckSymmetric(const Matrix &m, const char *who) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ArgumentError(std::string(who) + ": matrix must be square and non-empty, got " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  if (!m.AllFinite()) throw ArgumentError(std::string(who) + ": non-finite entry");
  const double scale = MaxAbs(m);
  double asym = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c)
    for (std::size_t r = c + 1; r < m.rows(); ++r)
      asym = std::max(asym, std::abs(m(r, c) - m(c, r)));
  if (asym > kSymmetryTolerance * scale)
    throw ArgumentError(std::string(who) + ": matrix is not symmetric (max |a_ij - a_ji| = " +
                        std::to_string(asym) + ")");
}

double OffDiagonalSquares(const Matrix &a) {
  double off = 0.0;
  for (std::size_t q = 1; q < a.cols(); ++q)
    for (std::size_t p = 0; p < q; ++p) off += a(p, q) * a(p, q);
  return off;
}

// Applies the rotation that annihilates a(p, q) to both a and the
// accumulated eigenvector matrix v.
void Rotate(Matrix &a, Matrix &v, std::size_t p, std::size_t q) {
  const std::size_t n = a.rows();
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  for (std::size_t k = 0; k < n; ++k) {
    const double akp = a(k, p), akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double apk = a(p, k), aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  auto vp = v.col(p), vq = v.col(q);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = vp[k], y = vq[k];
    vp[k] = c * x - s * y;
    vq[k] = s * x + c * y;
  }
}

EigenResult SortDescending(const Vector &values, const Matrix &vectors) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] > values[j]; });
  EigenResult out;
  out.values.resize(values.size());
  out.vectors = Matrix(vectors.rows(), vectors.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.values[k] = values[order[k]];
    auto src = vectors.col(order[k]);
    std::copy(src.begin(), src.end(), out.vectors.col(k).begin());
  }
  return out;
}

}  // namespace

Matrix Covariance(const Matrix &data, std::span<const double> mean) {
  if (data.rows() == 0 || data.cols() == 0)
    throw ArgumentError("Covariance: data must have at least one row and one column");
  if (mean.size() != data.rows())
    throw ArgumentError("Covariance: mean has length " + std::to_string(mean.size()) +
                        " but data has " + std::to_string(data.rows()) + " rows");
  const std::size_t m = data.rows();
  Matrix out(m, m);
  Vector phi(m);
  for (std::size_t t = 0; t < data.cols(); ++t) {
    auto x = data.col(t);
    for (std::size_t i = 0; i < m; ++i) phi[i] = x[i] - mean[i];
    for (std::size_t j = 0; j < m; ++j) {
      const double pj = phi[j];
      auto oc = out.col(j);
      for (std::size_t i = 0; i <= j; ++i) oc[i] += phi[i] * pj;
    }
  }
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < j; ++i) out(j, i) = out(i, j);
  return out;
}

void CanonicalizeSigns(Matrix *vectors) {
  for (std::size_t c = 0; c < vectors->cols(); ++c) {
    auto col = vectors->col(c);
    std::size_t arg = 0;
    for (std::size_t r = 1; r < col.size(); ++r)
      if (std::abs(col[r]) > std::abs(col[arg])) arg = r;
    if (col[arg] < 0.0)
      for (double &v : col) v = -v;
  }
}

EigenResult SymEigendecomp(const Matrix &m) {
  CheckSymmetric(m, "SymEigendecomp");
  const std::size_t n = m.rows();
  if (n > kMaxEigenDim)
    throw ArgumentError("SymEigendecomp: dimension " + std::to_string(n) +
                        " exceeds supported maximum " + std::to_string(kMaxEigenDim));

  Matrix a(n, n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) a(r, c) = 0.5 * (m(r, c) + m(c, r));
  Matrix v = Matrix::Identity(n);

  const double fro = a.FrobeniusNorm();
  const double tol = 1e-13 * fro;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    const double off = OffDiagonalSquares(a);
    if (off == 0.0 || std::sqrt(off) <= tol) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Once the rotation would be below the diagonals' resolution, just
        // drop the element.
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        Rotate(a, v, p, q);
      }
    }
  }
  if (!converged) {
    const double off = OffDiagonalSquares(a);
    if (off == 0.0 || std::sqrt(off) <= tol) {
      converged = true;
    } else {
      throw NumericError("SymEigendecomp: Jacobi iteration did not converge within " +
                         std::to_string(kMaxJacobiSweeps) + " sweeps (off-diagonal norm " +
                         std::to_string(std::sqrt(off)) + ")");
    }
  }

  Vector values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  EigenResult out = SortDescending(values, v);
  CanonicalizeSigns(&out.vectors);
  return out;
}

EigenResult SolveGeneralizedEig(const Matrix &s_b, const Matrix &s_w, double ridge) {
  CheckSymmetric(s_b, "SolveGeneralizedEig(s_b)");
  CheckSymmetric(s_w, "SolveGeneralizedEig(s_w)");
  if (s_b.rows() != s_w.rows())
    throw ArgumentError("SolveGeneralizedEig: s_b is " + std::to_string(s_b.rows()) +
                        "-dimensional but s_w is " + std::to_string(s_w.rows()));
  if (!(ridge >= 0.0) || !std::isfinite(ridge))
    throw ArgumentError("SolveGeneralizedEig: ridge must be finite and >= 0");
  const std::size_t n = s_b.rows();

  Matrix a = s_w;
  for (std::size_t i = 0; i < n; ++i) a(i, i) += ridge;
  const EigenResult aw = SymEigendecomp(a);
  const double hi = aw.values.front(), lo = aw.values.back();
  if (!(lo > 0.0) || hi / lo > kMaxPencilCondition)
    throw NumericError("SolveGeneralizedEig: S_W + ridge*I is numerically singular "
                       "(eigenvalue range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "]); raise the ridge (currently " + std::to_string(ridge) + ")");

  // Whitening transform: W^T (S_W + ridge I) W = I.
  Matrix whiten = aw.vectors;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = 1.0 / std::sqrt(aw.values[j]);
    for (double &x : whiten.col(j)) x *= s;
  }
  Matrix c = whiten.Transposed() * (s_b * whiten);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) c(i, j) = c(j, i) = 0.5 * (c(i, j) + c(j, i));

  EigenResult ce = SymEigendecomp(c);
  EigenResult out;
  out.values = std::move(ce.values);
  out.vectors = whiten * ce.vectors;
  for (std::size_t j = 0; j < n; ++j) {
    auto col = out.vectors.col(j);
    const double nrm = Norm2(col);
    for (double &x : col) x /= nrm;
  }
  CanonicalizeSigns(&out.vectors);
  return out;
}

}  // namespace spkr
