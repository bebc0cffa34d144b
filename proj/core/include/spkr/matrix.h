// spkr/matrix.h

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

#ifndef SPKR_MATRIX_H_
#define SPKR_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace spkr {

using Vector = std::vector<double>;

/// Dense real matrix stored column-major: element (r, c) lives at
/// data()[c * rows() + r], so each column is a contiguous span. Feature
/// matrices keep one frame per column, which makes frame access cheap.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix Identity(std::size_t n);
  static Matrix Diagonal(std::span<const double> diag);
  // Builds from row-major nested initializer data; handy in tests.
  static Matrix FromRows(const std::vector<std::vector<double>> &rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const {
    return {data_.data() + c * rows_, rows_};
  }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::span<const double> values() const { return data_; }

  Matrix Transposed() const;
  // Copy of columns [first, first + count).
  Matrix Columns(std::size_t first, std::size_t count) const;
  double Trace() const;
  double FrobeniusNorm() const;
  bool AllFinite() const;

  friend bool operator==(const Matrix &a, const Matrix &b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix &a, const Matrix &b);
Matrix operator-(const Matrix &a, const Matrix &b);
Matrix operator+(const Matrix &a, const Matrix &b);
Matrix operator*(double s, const Matrix &a);

double Dot(std::span<const double> a, std::span<const double> b);
double Norm2(std::span<const double> a);

}  // namespace spkr

#endif  // SPKR_MATRIX_H_
