// spkr/matrix.cc

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

#include "spkr/matrix.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "spkr/errors.h"

namespace spkr {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::Diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::FromRows(const std::vector<std::vector<double>> &rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols())
      throw ArgumentError("Matrix::FromRows: ragged row " + std::to_string(r));
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Matrix Matrix::Transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t r = 0; r < rows_; ++r) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::Columns(std::size_t first, std::size_t count) const {
  if (first + count > cols_)
    throw ArgumentError("Matrix::Columns: range exceeds column count");
  Matrix out(rows_, count);
  std::copy(data_.begin() + first * rows_, data_.begin() + (first + count) * rows_,
            out.data_.begin());
  return out;
}

double Matrix::Trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double Matrix::FrobeniusNorm() const { return Norm2(data_); }

bool Matrix::AllFinite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix operator*(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.rows())
    throw ArgumentError("matrix product: inner dimensions differ (" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
  Matrix out(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto oc = out.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double bkj = b(k, j);
      if (bkj == 0.0) continue;
      auto ac = a.col(k);
      for (std::size_t i = 0; i < a.rows(); ++i) oc[i] += ac[i] * bkj;
    }
  }
  return out;
}

namespace {
void CheckSameShape(const Matrix &a, const Matrix &b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ArgumentError(std::string("matrix ") + op + ": shape mismatch");
}
}  // namespace

Matrix operator-(const Matrix &a, const Matrix &b) {
  CheckSameShape(a, b, "difference");
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix operator+(const Matrix &a, const Matrix &b) {
  CheckSameShape(a, b, "sum");
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix operator*(double s, const Matrix &a) {
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) out.data()[i] *= s;
  return out;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm2(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

}  // namespace spkr
