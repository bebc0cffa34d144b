// spkr/linalg_test.cc

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

#include "doctest.h"
#include "spkr/errors.h"
#include "spkr/linalg.h"
#include "test_util.h"

using namespace spkr;
using spkr::testing::Gen;
using spkr::testing::MaxAbsDiff;

namespace {

// A A^T with A = data - mean, by the textbook triple loop.
Matrix NaiveCovariance(const Matrix &x, const Vector &mean) {
  const std::size_t m = x.rows(), n = x.cols();
  Matrix c(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t t = 0; t < n; ++t) c(i, j) += (x(i, t) - mean[i]) * (x(j, t) - mean[j]);
  return c;
}

Vector RowMean(const Matrix &x) {
  Vector mean(x.rows(), 0.0);
  for (std::size_t t = 0; t < x.cols(); ++t)
    for (std::size_t d = 0; d < x.rows(); ++d) mean[d] += x(d, t) / x.cols();
  return mean;
}

double EigenResidual(const Matrix &m, const EigenResult &e) {
  double worst = 0.0;
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    auto u = e.vectors.col(i);
    double r = 0.0;
    for (std::size_t a = 0; a < m.rows(); ++a) {
      double mu = 0.0;
      for (std::size_t b = 0; b < m.cols(); ++b) mu += m(a, b) * u[b];
      r += (mu - e.values[i] * u[a]) * (mu - e.values[i] * u[a]);
    }
    worst = std::max(worst, std::sqrt(r));
  }
  return worst;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("covariance of a single centred column is zero") {
  Matrix x = Matrix::FromRows({{1.5}, {-2.0}, {4.0}});
  Vector mean{1.5, -2.0, 4.0};
  Matrix c = Covariance(x, mean);
  CHECK(c == Matrix(3, 3));
}

TEST_CASE("covariance of two unit columns") {
  Matrix x = Matrix::Identity(2);
  Vector mean{0.5, 0.5};
  Matrix c = Covariance(x, mean);
  CHECK(c(0, 0) == doctest::Approx(0.5));
  CHECK(c(0, 1) == doctest::Approx(-0.5));
  CHECK(c(1, 0) == doctest::Approx(-0.5));
  CHECK(c(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("covariance matches a triple-loop oracle") {
  Gen g(11);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix x = g.Randn(5, 40, 3.0);
    Vector mean = RowMean(x);
    Matrix c = Covariance(x, mean);
    Matrix ref = NaiveCovariance(x, mean);
    CHECK(MaxAbsDiff(c, ref) <= 1e-12 * std::max(1.0, ref.FrobeniusNorm()));
    CHECK(c == c.Transposed());
  }
}

TEST_CASE("covariance is positive semidefinite") {
  Gen g(12);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix x = g.Randn(8, g.Int(2, 30));
    EigenResult e = SymEigendecomp(Covariance(x, RowMean(x)));
    CHECK(e.values.back() >= -1e-10 * std::max(1.0, e.values.front()));
  }
}

TEST_CASE("covariance rejects a mean of the wrong length") {
  Matrix x(3, 4);
  Vector mean{0.0, 0.0};
  CHECK_THROWS_AS(Covariance(x, mean), ArgumentError);
}

TEST_CASE("identity has unit eigenvalues and an orthonormal basis") {
  EigenResult e = SymEigendecomp(Matrix::Identity(3));
  for (double v : e.values) CHECK(v == doctest::Approx(1.0));
  Matrix utu = e.vectors.Transposed() * e.vectors;
  CHECK(MaxAbsDiff(utu, Matrix::Identity(3)) < 1e-12);
}

TEST_CASE("diagonal input yields sorted values and permuted axes") {
  Vector d{3.0, 1.0, 2.0};
  EigenResult e = SymEigendecomp(Matrix::Diagonal(d));
  REQUIRE(e.values.size() == 3);
  CHECK(e.values[0] == 3.0);
  CHECK(e.values[1] == 2.0);
  CHECK(e.values[2] == 1.0);
  // Columns are +e_0, +e_2, +e_1 after sign canonicalization.
  CHECK(e.vectors(0, 0) == 1.0);
  CHECK(e.vectors(2, 1) == 1.0);
  CHECK(e.vectors(1, 2) == 1.0);
}

TEST_CASE("random symmetric eigenpairs satisfy the defining equation") {
  Gen g(13);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix m = g.Symmetric(10);
    EigenResult e = SymEigendecomp(m);
    CHECK(EigenResidual(m, e) <= 1e-8 * m.FrobeniusNorm());
    for (std::size_t i = 1; i < e.values.size(); ++i) CHECK(e.values[i - 1] >= e.values[i]);
  }
}

TEST_CASE("reconstruction, trace and orthonormality over a property sweep") {
  Gen g(14);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = g.Int(1, 24);
    Matrix m = g.Symmetric(n);
    EigenResult e = SymEigendecomp(m);
    Matrix recon = e.vectors * Matrix::Diagonal(e.values) * e.vectors.Transposed();
    CHECK((recon - m).FrobeniusNorm() <= 1e-8 * m.FrobeniusNorm());
    double sum = 0.0;
    for (double v : e.values) sum += v;
    CHECK(std::abs(sum - m.Trace()) <= 1e-8 * std::max(1.0, m.FrobeniusNorm()));
    CHECK((e.vectors.Transposed() * e.vectors - Matrix::Identity(n)).FrobeniusNorm() <= 1e-8);
  }
}

TEST_CASE("eigenvector signs are canonical") {
  Gen g(15);
  Matrix m = g.Symmetric(6);
  EigenResult e = SymEigendecomp(m);
  for (std::size_t j = 0; j < 6; ++j) {
    auto u = e.vectors.col(j);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < 6; ++i)
      if (std::abs(u[i]) > std::abs(u[arg])) arg = i;
    CHECK(u[arg] > 0.0);
  }
  // Negating the input reverses and negates the spectrum.
  EigenResult n = SymEigendecomp(-1.0 * m);
  CHECK(n.values.front() == doctest::Approx(-e.values.back()));
}

TEST_CASE("non-symmetric input is rejected") {
  Matrix m = Matrix::FromRows({{1.0, 2.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(SymEigendecomp(m), ArgumentError);
  CHECK_THROWS_AS(SymEigendecomp(Matrix(2, 3)), ArgumentError);
}

TEST_CASE("identity pencil has unit eigenvalues") {
  EigenResult e = SolveGeneralizedEig(Matrix::Identity(4), Matrix::Identity(4), 0.0);
  for (double v : e.values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("diagonal pencil solved by hand") {
  Matrix sb = Matrix::Diagonal(Vector{4.0, 1.0});
  Matrix sw = Matrix::Diagonal(Vector{2.0, 1.0});
  EigenResult e = SolveGeneralizedEig(sb, sw, 0.0);
  CHECK(e.values[0] == doctest::Approx(2.0));
  CHECK(e.values[1] == doctest::Approx(1.0));
  CHECK(e.vectors(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(1, 0)) < 1e-12);
  CHECK(e.vectors(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("random SPD pencils satisfy S_B w = lambda (S_W + ridge I) w") {
  Gen g(16);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix sb = g.Spd(8, 0.0), sw = g.Spd(8, 0.5);
    const double ridge = rep % 2 ? 1e-3 : 0.0;
    EigenResult e = SolveGeneralizedEig(sb, sw, ridge);
    Matrix swr = sw;
    for (std::size_t i = 0; i < 8; ++i) swr(i, i) += ridge;
    const double tol = 1e-6 * (sb.FrobeniusNorm() + sw.FrobeniusNorm());
    for (std::size_t i = 0; i < 8; ++i) {
      auto w = e.vectors.col(i);
      CHECK(Norm2(w) == doctest::Approx(1.0).epsilon(1e-10));
      double r = 0.0;
      for (std::size_t a = 0; a < 8; ++a) {
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t b = 0; b < 8; ++b) {
          lhs += sb(a, b) * w[b];
          rhs += swr(a, b) * w[b];
        }
        r += (lhs - e.values[i] * rhs) * (lhs - e.values[i] * rhs);
      }
      CHECK(std::sqrt(r) <= tol);
    }
  }
}

TEST_CASE("singular within-class matrix asks for a ridge") {
  Matrix sw(3, 3);
  sw(0, 0) = 1.0;
  sw(1, 1) = 1.0;
  try {
    SolveGeneralizedEig(Matrix::Identity(3), sw, 0.0);
    FAIL("expected NumericError");
  } catch (const NumericError &e) {
    CHECK(std::string(e.what()).find("ridge") != std::string::npos);
  }
  CHECK_NOTHROW(SolveGeneralizedEig(Matrix::Identity(3), sw, 1e-3));
  CHECK_THROWS_AS(SolveGeneralizedEig(Matrix::Identity(3), sw, -1.0), ArgumentError);
}

}  // TEST_SUITE
