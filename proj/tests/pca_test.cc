// spkr/pca_test.cc

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


#include <cmath>
#include <numbers>

#include "doctest.h"
#include "spkr/errors.h"
#include "spkr/pca.h"
#include "test_util.h"

using namespace spkr;
using spkr::testing::Gen;
using spkr::testing::NaiveSubspaceScore;
using spkr::testing::Range;
using spkr::testing::TempDir;

namespace {

FeatureMatrix OneFrame(const Vector &x) {
  Matrix m(x.size(), 1);
  for (std::size_t d = 0; d < x.size(); ++d) m(d, 0) = x[d];
  return FeatureMatrix(std::move(m));
}

Vector Along(const SpeakerEigenspace &m, std::size_t j, double c) {
  Vector x = m.mean;
  for (std::size_t d = 0; d < x.size(); ++d) x[d] += c * m.basis(d, j);
  return x;
}

// Speakers with distinct means and per-speaker anisotropic scales.
struct Toy {
  std::vector<SpeakerEigenspace> models;
  std::vector<LabeledFeatures> clips;
};

Toy MakeToy(std::uint64_t seed, int speakers, int dims, int clips_per_speaker, double spread) {
  Gen g(seed);
  Toy toy;
  for (int s = 0; s < speakers; ++s) {
    Vector mean(dims), scale(dims);
    for (int d = 0; d < dims; ++d) {
      mean[d] = spread * g.Normal();
      scale[d] = g.Uniform(0.3, 2.0);
    }
    const std::string id = "s" + std::to_string(s);
    toy.models.push_back(TrainEigenspace(id, g.Gaussian(mean, scale, 200)));
    for (int c = 0; c < clips_per_speaker; ++c)
      toy.clips.push_back(LabeledFeatures{id, g.Gaussian(mean, scale, 20)});
  }
  return toy;
}

std::size_t ArgMaxFirst(const Vector &v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

double MixedRate(const Toy &toy, const PcaParams &params) {
  int correct = 0;
  for (const auto &c : toy.clips)
    correct += ClassifyMixed(toy.models, c.features, params).speaker_id == c.speaker_id;
  return static_cast<double>(correct) / toy.clips.size();
}

}  // namespace

TEST_SUITE("pca") {

TEST_CASE("two frames give a rank-one eigenspace") {
  FeatureMatrix x(Matrix::FromRows({{1.0, 3.0}, {2.0, 2.0}, {3.0, 1.0}}));
  SpeakerEigenspace m = TrainEigenspace("a", x);
  CHECK(m.mean == Vector{2.0, 2.0, 2.0});
  REQUIRE(m.rank() == 2);
  CHECK(m.eigenvalues[0] == doctest::Approx(4.0));
  CHECK(m.eigenvalues[1] == doctest::Approx(0.0));
  CHECK(std::abs(m.basis(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::abs(m.basis(1, 0)) < 1e-12);
  CHECK(m.basis(0, 0) == doctest::Approx(-m.basis(2, 0)));
}

TEST_CASE("full-rank enrollment keeps every direction") {
  Gen g(21);
  SpeakerEigenspace m = TrainEigenspace("a", g.Features(39, 1198));
  CHECK(m.rank() == 39);
  CHECK(m.dims() == 39);
  for (std::size_t i = 1; i < 39; ++i) CHECK(m.eigenvalues[i - 1] >= m.eigenvalues[i]);
  Matrix utu = m.basis.Transposed() * m.basis;
  CHECK(spkr::testing::MaxAbsDiff(utu, Matrix::Identity(39)) < 1e-10);
}

TEST_CASE("leading direction of an anisotropic Gaussian") {
  Gen g(22);
  Vector mean(6, 1.0), scale(6, 1.0);
  scale[3] = 5.0;
  SpeakerEigenspace m = TrainEigenspace("a", g.Gaussian(mean, scale, 10000));
  const double angle = std::acos(std::min(1.0, std::abs(m.basis(3, 0))));
  CHECK(angle < 5.0 * std::numbers::pi / 180.0);
  CHECK(m.basis(3, 0) > 0.0);
}

TEST_CASE("identical frames are a numeric error") {
  FeatureMatrix x(Matrix(4, 10, 1.0));
  CHECK_THROWS_AS(TrainEigenspace("flat", x), NumericError);
  CHECK_THROWS_AS(TrainEigenspace("one", FeatureMatrix(Matrix(4, 1))), ArgumentError);
}

TEST_CASE("scores of points placed along known directions") {
  Gen g(23);
  SpeakerEigenspace m = TrainEigenspace("a", g.Features(5, 100));
  CHECK(ScorePcs(m, OneFrame(m.mean), 3) == 0.0);
  CHECK(ScoreTes(m, OneFrame(m.mean), 2) == 0.0);
  CHECK(ScorePcs(m, OneFrame(Along(m, 0, 2.5)), 1) == doctest::Approx(2.5));
  CHECK(ScorePcs(m, OneFrame(Along(m, 0, -2.5)), 1) == doctest::Approx(2.5));
  CHECK(ScoreTes(m, OneFrame(Along(m, 4, 1.5)), 1) == doctest::Approx(1.5));
  CHECK(ScoreTes(m, OneFrame(Along(m, 0, 1.5)), 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ScorePcs(m, OneFrame(Along(m, 4, 1.5)), 4) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("scores match an explicit-loop oracle") {
  Gen g(24);
  for (int rep = 0; rep < 10; ++rep) {
    SpeakerEigenspace m = TrainEigenspace("a", g.Features(8, 60, g.Uniform(0.5, 3.0)));
    FeatureMatrix x = g.Features(8, 15, 2.0);
    for (int k = 1; k <= 8; ++k) {
      CHECK(ScorePcs(m, x, k) == doctest::Approx(NaiveSubspaceScore(m, x, Range(0, k))));
      CHECK(ScoreTes(m, x, k) == doctest::Approx(NaiveSubspaceScore(m, x, Range(8 - k, k))));
    }
  }
}

TEST_CASE("complementary subspaces split the squared residual") {
  Gen g(25);
  for (int rep = 0; rep < 20; ++rep) {
    SpeakerEigenspace m = TrainEigenspace("a", g.Features(7, 40));
    Vector x(7);
    for (double &v : x) v = g.Normal(0.0, 3.0);
    const int k_p = g.Int(1, 6);
    const double pcs = ScorePcs(m, OneFrame(x), k_p), tes = ScoreTes(m, OneFrame(x), 7 - k_p);
    double r2 = 0.0;
    for (std::size_t d = 0; d < 7; ++d) r2 += (x[d] - m.mean[d]) * (x[d] - m.mean[d]);
    CHECK(pcs * pcs + tes * tes == doctest::Approx(r2));
  }
}

TEST_CASE("p = 1 and p = 0 reduce to the single-subspace rules") {
  Toy toy = MakeToy(26, 4, 6, 3, 0.5);
  for (const auto &c : toy.clips) {
    Vector pcs, neg_tes;
    for (const auto &m : toy.models) {
      pcs.push_back(ScorePcs(m, c.features, 2));
      neg_tes.push_back(-ScoreTes(m, c.features, 3));
    }
    CHECK(ClassifyMixed(toy.models, c.features, {2, 3, 1.0}).speaker_index == ArgMaxFirst(pcs));
    CHECK(ClassifyMixed(toy.models, c.features, {2, 3, 0.0}).speaker_index == ArgMaxFirst(neg_tes));
  }
}

TEST_CASE("decisions are invariant to a common positive scaling") {
  Gen g(27);
  Toy toy = MakeToy(27, 4, 5, 4, 0.5);
  std::vector<SpeakerEigenspace> scaled;
  for (const auto &m : toy.models) {
    SpeakerEigenspace s = m;
    for (double &v : s.mean) v *= 3.0;
    scaled.push_back(s);
  }
  for (const auto &c : toy.clips) {
    const double p = g.Uniform();
    FeatureMatrix x3(3.0 * c.features.values);
    CHECK(ClassifyMixed(toy.models, c.features, {1, 2, p}).speaker_index ==
          ClassifyMixed(scaled, x3, {1, 2, p}).speaker_index);
  }
}

TEST_CASE("params are validated against the rank") {
  CHECK_NOTHROW(PcaParams{2, 3, 0.5}.Validate(5));
  CHECK_THROWS_AS((PcaParams{3, 3, 0.5}).Validate(5), ArgumentError);
  CHECK_THROWS_AS((PcaParams{0, 1, 0.5}).Validate(5), ArgumentError);
  CHECK_THROWS_AS((PcaParams{1, 1, 1.5}).Validate(5), ArgumentError);
  Toy toy = MakeToy(28, 2, 4, 1, 1.0);
  CHECK_THROWS_AS(ClassifyMixed(toy.models, toy.clips[0].features, {3, 2, 0.5}), ArgumentError);
  CHECK_THROWS_AS(ClassifyMixed(toy.models, FeatureMatrix(Matrix(3, 4)), {1, 1, 0.5}),
                  ArgumentError);
  CHECK_THROWS_AS(FindSpeaker(toy.models, "nobody"), ArgumentError);
  CHECK(FindSpeaker(toy.models, "s1") == 1);
}

TEST_CASE("probability grid includes both endpoints") {
  auto grid = ProbabilityGrid(0.25);
  CHECK(grid == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(ProbabilityGrid(0.01).size() == 101);
  CHECK(ProbabilityGrid(0.0025).size() == 401);
  CHECK_THROWS_AS(ProbabilityGrid(0.0), ArgumentError);
}

TEST_CASE("grid search agrees with brute-force classification") {
  for (std::uint64_t seed : {31, 32, 33}) {
    Toy toy = MakeToy(seed, 4, 6, 4, 0.25);
    GridSearchOptions opt;
    opt.k_max = 3;
    opt.p_step = 0.1;
    GridSearchResult res = GridSearch(toy.models, toy.clips, opt);
    const auto grid = ProbabilityGrid(0.1);

    double best = 0.0;
    int maximizers = 0;
    std::vector<std::vector<double>> rate(9);
    for (int k_p = 1; k_p <= 3; ++k_p)
      for (int k_t = 1; k_t <= 3; ++k_t)
        for (double p : grid) {
          const double r = MixedRate(toy, {k_p, k_t, p});
          rate[(k_p - 1) * 3 + k_t - 1].push_back(r);
          best = std::max(best, r);
        }
    for (const auto &row : rate)
      for (double r : row) maximizers += r == best;

    CHECK(res.best_rate == doctest::Approx(best));
    int covered = 0;
    for (const auto &pt : res.points) {
      covered += pt.count;
      const auto &row = rate[(pt.k_p - 1) * 3 + pt.k_t - 1];
      for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] >= pt.p_lo - 1e-12 && grid[i] <= pt.p_hi + 1e-12) CHECK(row[i] == best);
    }
    CHECK(covered == maximizers);
    for (std::size_t i = 1; i < res.points.size(); ++i) {
      const auto &a = res.points[i - 1], &b = res.points[i];
      CHECK((a.total_dim() < b.total_dim() ||
             (a.total_dim() == b.total_dim() &&
              (a.k_p < b.k_p || (a.k_p == b.k_p && a.p_lo < b.p_lo)))));
    }
    PcaParams p = res.Best();
    CHECK(MixedRate(toy, p) == doctest::Approx(best));
    CHECK(p.k_p + p.k_t == res.points.front().total_dim());
  }
}

TEST_CASE("grid search with one speaker is perfect everywhere") {
  Toy toy = MakeToy(34, 1, 4, 2, 1.0);
  GridSearchOptions opt;
  opt.p_step = 0.25;
  GridSearchResult res = GridSearch(toy.models, toy.clips, opt);
  CHECK(res.k_max == 2);
  CHECK(res.best_rate == 1.0);
  REQUIRE(res.points.size() == 4);
  for (const auto &pt : res.points) {
    CHECK(pt.p_lo == 0.0);
    CHECK(pt.p_hi == 1.0);
    CHECK(pt.count == 5);
  }
  PcaParams best = res.Best();
  CHECK(best.k_p == 1);
  CHECK(best.k_t == 1);
  CHECK(best.p == 0.5);
}

TEST_CASE("grid search rejects an oversized k_max") {
  Toy toy = MakeToy(35, 2, 4, 1, 1.0);
  GridSearchOptions opt;
  opt.k_max = 3;
  CHECK_THROWS_AS(GridSearch(toy.models, toy.clips, opt), ArgumentError);
  CHECK_THROWS_AS(GridSearch(toy.models, {}, {}), ArgumentError);
}

TEST_CASE("dimension sweep matches per-dimension decisions") {
  Toy toy = MakeToy(36, 3, 5, 3, 0.3);
  DimensionSweepResult sw = DimensionSweep(toy.models, toy.clips);
  REQUIRE(sw.dims.size() == 5);
  for (int dim = 1; dim <= 5; ++dim) {
    int pcs_ok = 0, tes_ok = 0, mix_ok = 0;
    for (const auto &c : toy.clips) {
      Vector pcs, tes, mix;
      for (const auto &m : toy.models) {
        const double a = ScorePcs(m, c.features, dim), b = ScoreTes(m, c.features, dim);
        pcs.push_back(a);
        tes.push_back(-b);
        mix.push_back(0.5 * a - 0.5 * b);
      }
      const std::size_t truth = FindSpeaker(toy.models, c.speaker_id);
      pcs_ok += ArgMaxFirst(pcs) == truth;
      tes_ok += ArgMaxFirst(tes) == truth;
      mix_ok += ArgMaxFirst(mix) == truth;
    }
    const double n = toy.clips.size();
    CHECK(sw.dims[dim - 1] == dim);
    CHECK(sw.pcs_rate[dim - 1] == doctest::Approx(pcs_ok / n));
    CHECK(sw.tes_rate[dim - 1] == doctest::Approx(tes_ok / n));
    CHECK(sw.mixed_rate[dim - 1] == doctest::Approx(mix_ok / n));
  }
  CHECK(DimensionSweepCsv(sw).rfind("dim,", 0) == 0);
}

TEST_CASE("eigenspace files round-trip bit-exactly") {
  TempDir dir("pca");
  Toy toy = MakeToy(37, 1, 6, 1, 1.0);
  SaveEigenspace(toy.models[0], dir / "m.eig");
  SpeakerEigenspace back = LoadEigenspace(dir / "m.eig");
  CHECK(back.speaker_id == "s0");
  CHECK(back.mean == toy.models[0].mean);
  CHECK(back.basis == toy.models[0].basis);
  CHECK(back.eigenvalues == toy.models[0].eigenvalues);
  SaveFeatures(FeatureMatrix(Matrix(2, 2)), dir / "f.feat");
  CHECK_THROWS_AS(LoadEigenspace(dir / "f.feat"), FormatError);
}

}  // TEST_SUITE
