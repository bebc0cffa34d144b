// spkr/acceptance.cc

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


// Acceptance suite: one PASS or FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "spkr/corpus.h"
#include "spkr/experiment.h"
#include "spkr/fusion.h"
#include "spkr/gmm.h"
#include "spkr/linalg.h"
#include "spkr/pca.h"
#include "test_util.h"

using namespace spkr;
using spkr::testing::Gen;
using spkr::testing::NaiveSubspaceScore;
using spkr::testing::Range;
using spkr::testing::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Report(int n, const std::string &name, const std::function<Outcome()> &check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", n, name.c_str(),
              o.detail.c_str());
  std::fflush(stdout);
}

std::string Fmt(const char *fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::size_t ArgMaxFirst(const Vector &v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

Outcome EigenOracles() {
  const auto start = Clock::now();
  Gen g(1001);
  double worst_recon = 0.0, worst_trace = 0.0, worst_orth = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = g.Int(1, 40);
    Matrix m = g.Symmetric(n);
    EigenResult e = SymEigendecomp(m);
    const double scale = std::max(1.0, m.FrobeniusNorm());
    Matrix recon = e.vectors * Matrix::Diagonal(e.values) * e.vectors.Transposed();
    double sum = 0.0;
    for (double v : e.values) sum += v;
    worst_recon = std::max(worst_recon, (recon - m).FrobeniusNorm() / scale);
    worst_trace = std::max(worst_trace, std::abs(sum - m.Trace()) / scale);
    worst_orth = std::max(
        worst_orth, (e.vectors.Transposed() * e.vectors - Matrix::Identity(n)).FrobeniusNorm());
  }
  const double secs = Seconds(start);
  const bool ok = worst_recon <= 1e-8 && worst_trace <= 1e-8 && worst_orth <= 1e-8 && secs < 30.0;
  return {ok, Fmt("500 matrices, recon %.1e, trace %.1e, orth %.1e, %.2f s", worst_recon,
                  worst_trace, worst_orth, secs)};
}

// Runs EM one iteration at a time so the floor can be checked after every
// M-step, and confirms the stepped trace equals the one-shot trace.
Outcome EmMonotonicity() {
  const auto start = Clock::now();
  const int orders[] = {1, 2, 8, 15}, dim_set[] = {1, 2, 39};
  int runs = 0, bad_mono = 0, bad_floor = 0, bad_match = 0;
  for (; runs < 100; ++runs) {
    const int order = orders[runs % 4], dims = dim_set[(runs / 4) % 3];
    Gen g(2000 + runs);
    Matrix m(dims, 400);
    for (std::size_t t = 0; t < 400; ++t) {
      const double shift = g.Int(0, 2) * 3.0;
      for (int d = 0; d < dims; ++d) m(d, t) = shift + g.Normal(0.0, 1.0 + 0.2 * (d % 3));
    }
    FeatureMatrix x(std::move(m));
    EmConfig cfg;
    cfg.max_iters = 25;
    cfg.ll_epsilon = 1e-6;
    cfg.seed = runs;
    const Vector floor = VarianceFloor(x, cfg);
    auto [full, trace] = EmFit(x, InitGmm(x, order), cfg);

    EmConfig one = cfg;
    one.max_iters = 1;
    GmmParams cur = InitGmm(x, order);
    Vector stepped;
    for (int it = 0; it < trace.iterations; ++it) {
      auto [next, t1] = EmFit(x, cur, one);
      if (it == 0) stepped.push_back(t1.log_likelihoods[0]);
      stepped.push_back(t1.log_likelihoods[1]);
      for (std::size_t i = 0; i < next.order(); ++i)
        for (std::size_t d = 0; d < next.dims(); ++d)
          if (next.variances(d, i) < floor[d]) ++bad_floor;
      cur = std::move(next);
    }
    for (std::size_t i = 1; i < trace.log_likelihoods.size(); ++i)
      if (trace.log_likelihoods[i] <
          trace.log_likelihoods[i - 1] - 1e-9 * std::abs(trace.log_likelihoods[i - 1]))
        ++bad_mono;
    if (trace.events.empty() && stepped != trace.log_likelihoods) ++bad_match;
  }
  const double secs = Seconds(start);
  const bool ok = runs == 100 && bad_mono == 0 && bad_floor == 0 && bad_match == 0 && secs < 120.0;
  return {ok, Fmt("%d runs, %d decreases, %d floor violations, %d trace mismatches, %.2f s", runs,
                  bad_mono, bad_floor, bad_match, secs)};
}

Outcome MixtureRecovery() {
  int good = 0;
  for (int run = 0; run < 100; ++run) {
    Gen g(3000 + run);
    Matrix m(1, 5000);
    for (std::size_t t = 0; t < 5000; ++t) m(0, t) = (g.Uniform() < 0.5 ? -3.0 : 3.0) + g.Normal();
    FeatureMatrix x(std::move(m));
    auto [p, trace] = EmFit(x, InitGmm(x, 2));
    const double lo = std::min(p.means(0, 0), p.means(0, 1));
    const double hi = std::max(p.means(0, 0), p.means(0, 1));
    good += std::abs(lo + 3.0) <= 0.15 && std::abs(hi - 3.0) <= 0.15;
  }
  return {good >= 95, Fmt("%d/100 runs within 0.15 of +-3", good)};
}

struct Toy {
  std::vector<SpeakerEigenspace> models;
  std::vector<LabeledFeatures> clips;
};

Toy MakeToy(Gen &g, int speakers, int dims) {
  Toy toy;
  for (int s = 0; s < speakers; ++s) {
    Vector mean(dims), scale(dims);
    for (int d = 0; d < dims; ++d) {
      mean[d] = 0.4 * g.Normal();
      scale[d] = g.Uniform(0.3, 2.0);
    }
    const std::string id = "s" + std::to_string(s);
    toy.models.push_back(TrainEigenspace(id, g.Gaussian(mean, scale, 60)));
    for (int c = 0; c < 3; ++c) toy.clips.push_back({id, g.Gaussian(mean, scale, 8)});
  }
  return toy;
}

// Exhaustive search written without the score cache: every (k_p, k_t, p)
// re-scores every clip against every model by explicit loops.
std::vector<GridPoint> NaiveGrid(const Toy &toy, int k_max, double *best_rate) {
  const std::size_t ns = toy.models.size();
  const int n = 20;
  std::vector<std::vector<int>> correct;
  int best = 0;
  for (int k_p = 1; k_p <= k_max; ++k_p)
    for (int k_t = 1; k_t <= k_max; ++k_t) {
      std::vector<int> row(n + 1, 0);
      for (const auto &c : toy.clips) {
        Vector pcs(ns), tes(ns);
        for (std::size_t s = 0; s < ns; ++s) {
          const auto &m = toy.models[s];
          pcs[s] = NaiveSubspaceScore(m, c.features, Range(0, k_p));
          tes[s] = NaiveSubspaceScore(m, c.features, Range(m.rank() - k_t, k_t));
        }
        for (int i = 0; i <= n; ++i) {
          const double p = static_cast<double>(i) / n;
          Vector mix(ns);
          for (std::size_t s = 0; s < ns; ++s) mix[s] = p * pcs[s] - (1.0 - p) * tes[s];
          row[i] += toy.models[ArgMaxFirst(mix)].speaker_id == c.speaker_id;
        }
      }
      best = std::max(best, *std::max_element(row.begin(), row.end()));
      correct.push_back(row);
    }
  std::vector<GridPoint> points;
  for (int total = 2; total <= 2 * k_max; ++total)
    for (int k_p = 1; k_p <= k_max; ++k_p) {
      const int k_t = total - k_p;
      if (k_t < 1 || k_t > k_max) continue;
      const auto &row = correct[(k_p - 1) * k_max + (k_t - 1)];
      for (int i = 0; i <= n;) {
        if (row[i] != best) {
          ++i;
          continue;
        }
        int j = i;
        while (j < n && row[j + 1] == best) ++j;
        points.push_back({k_p, k_t, static_cast<double>(i) / n, static_cast<double>(j) / n,
                          j - i + 1});
        i = j + 1;
      }
    }
  *best_rate = static_cast<double>(best) / toy.clips.size();
  return points;
}

FusionWeights NaiveWeight(const std::vector<Vector> &g1, const std::vector<Vector> &g2,
                          const std::vector<std::size_t> &labels) {
  auto prep = [](const Vector &g) {
    double mx = g[0];
    for (double v : g) mx = std::max(mx, v);
    Vector gap(g.size());
    double top = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) top = std::max(top, gap[i] = mx - g[i]);
    if (top == 0.0) return gap;
    double ss = 0.0;
    for (double &v : gap) {
      v /= top;
      ss += v * v;
    }
    for (double &v : gap) v /= top * ss;
    return gap;
  };
  FusionWeights w;
  std::vector<int> winners;
  for (int i = 0; i <= 20; ++i) {
    const double p = i / 20.0;
    int ok = 0;
    for (std::size_t c = 0; c < labels.size(); ++c) {
      const Vector a = prep(g1[c]), b = prep(g2[c]);
      std::size_t best = 0;
      for (std::size_t s = 1; s < a.size(); ++s)
        if (p * a[s] + (1.0 - p) * b[s] < p * a[best] + (1.0 - p) * b[best]) best = s;
      ok += best == labels[c];
    }
    const double r = static_cast<double>(ok) / labels.size();
    w.rate_curve.push_back(r);
    w.p_grid.push_back(p);
    if (r > w.rate) {
      w.rate = r;
      winners.clear();
    }
    if (r == w.rate) winners.push_back(i);
  }
  const std::size_t k = winners.size();
  w.p_lo = winners.front() / 20.0;
  w.p_hi = winners.back() / 20.0;
  w.p_star = k % 2 ? winners[k / 2] / 20.0 : 0.5 * (winners[k / 2 - 1] / 20.0 + winners[k / 2] / 20.0);
  return w;
}

Outcome BruteForce() {
  Gen g(4001);
  int grid_bad = 0, weight_bad = 0, joint_bad = 0, instances = 0;
  for (int rep = 0; rep < 30; ++rep, ++instances) {
    const int speakers = g.Int(2, 5), dims = g.Int(2, 8);
    Toy toy = MakeToy(g, speakers, dims);
    GridSearchOptions opt;
    opt.p_step = 0.05;
    GridSearchResult res = GridSearch(toy.models, toy.clips, opt);
    double naive_best = 0.0;
    auto naive = NaiveGrid(toy, dims / 2, &naive_best);
    if (res.points != naive || res.best_rate != naive_best) ++grid_bad;

    std::vector<Vector> g1, g2;
    std::vector<std::size_t> labels;
    for (int c = 0; c < 12; ++c) {
      Vector a(speakers), b(speakers);
      const std::size_t truth = g.Int(0, speakers - 1);
      for (int s = 0; s < speakers; ++s) {
        a[s] = g.Normal(0.0, 5.0) + (s == static_cast<int>(truth) ? 4.0 : 0.0);
        b[s] = -1000.0 + g.Normal(0.0, 50.0) + (s == static_cast<int>(truth) ? 40.0 : 0.0);
      }
      g1.push_back(a);
      g2.push_back(b);
      labels.push_back(truth);
    }
    FusionWeights w = OptimizeWeight(g1, g2, labels, 0.05), ref = NaiveWeight(g1, g2, labels);
    if (w.rate_curve != ref.rate_curve || w.p_star != ref.p_star || w.p_lo != ref.p_lo ||
        w.p_hi != ref.p_hi || w.rate != ref.rate)
      ++weight_bad;

    std::vector<DimensionRate> rates;
    for (int k = 1; k <= dims; ++k) rates.push_back({k, g.Int(0, 12) / 12.0});
    int naive_k = 0;
    double naive_cost = 0.0;
    for (const auto &r : rates)
      if (naive_k == 0 || (1.0 - r.rate) * r.k < naive_cost) {
        naive_cost = (1.0 - r.rate) * r.k;
        naive_k = r.k;
      }
    if (JointOptimalDimension(rates) != naive_k) ++joint_bad;
  }
  return {grid_bad == 0 && weight_bad == 0 && joint_bad == 0,
          Fmt("%d instances; mismatches: grid %d, weight %d, k* %d", instances, grid_bad,
              weight_bad, joint_bad)};
}

Outcome Pythagorean() {
  Gen g(5001);
  double worst = 0.0;
  int frames = 0;
  while (frames < 10000) {
    const int dims = g.Int(2, 39);
    SpeakerEigenspace m = TrainEigenspace("s", g.Features(dims, dims + g.Int(1, 50), g.Uniform(0.5, 3.0)));
    for (int f = 0; f < 100; ++f, ++frames) {
      Matrix x(dims, 1);
      double r2 = 0.0;
      for (int d = 0; d < dims; ++d) {
        x(d, 0) = g.Normal(0.0, 4.0);
        r2 += (x(d, 0) - m.mean[d]) * (x(d, 0) - m.mean[d]);
      }
      const int k_p = g.Int(1, dims - 1);
      FeatureMatrix fx(std::move(x));
      const double pcs = ScorePcs(m, fx, k_p), tes = ScoreTes(m, fx, dims - k_p);
      worst = std::max(worst, std::abs(pcs * pcs + tes * tes - r2) / r2);
    }
  }
  return {worst <= 1e-9, Fmt("%d frames, worst relative error %.2e", frames, worst)};
}

Outcome Endpoints() {
  Gen g(6001);
  int mixed_bad = 0, combined_bad = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int speakers = g.Int(2, 5), dims = 4;
    std::vector<SpeakerEigenspace> models;
    for (int s = 0; s < speakers; ++s)
      models.push_back(TrainEigenspace("s" + std::to_string(s), g.Features(dims, 12, g.Uniform(0.5, 2.0))));
    FeatureMatrix x = g.Features(dims, 5);
    const int k_p = g.Int(1, 2), k_t = g.Int(1, 2);
    Vector pcs, neg_tes;
    for (const auto &m : models) {
      pcs.push_back(ScorePcs(m, x, k_p));
      neg_tes.push_back(-ScoreTes(m, x, k_t));
    }
    mixed_bad += ClassifyMixed(models, x, {k_p, k_t, 1.0}).speaker_index != ArgMaxFirst(pcs);
    mixed_bad += ClassifyMixed(models, x, {k_p, k_t, 0.0}).speaker_index != ArgMaxFirst(neg_tes);

    Vector g1(speakers), g2(speakers);
    for (int s = 0; s < speakers; ++s) {
      g1[s] = g.Normal(0.0, 10.0);
      g2[s] = -2000.0 + g.Normal(0.0, 100.0);
    }
    combined_bad += ClassifyCombined(g1, g2, 1.0) != ArgMaxFirst(g1);
    combined_bad += ClassifyCombined(g1, g2, 0.0) != ArgMaxFirst(g2);
  }
  return {mixed_bad == 0 && combined_bad == 0,
          Fmt("1000 sets; disagreements: mixed %d, combined %d", mixed_bad, combined_bad)};
}

Outcome FrameCounts() {
  FrontendConfig cfg;
  Gen g(7001);
  AudioClip a, b;
  a.samples.resize(12 * 16000);
  b.samples.resize(4 * 16000);
  for (double &v : a.samples) v = 0.1 * g.Normal();
  for (double &v : b.samples) v = 0.1 * g.Normal();
  FeatureMatrix fa = ExtractFeatures(a, cfg), fb = ExtractFeatures(b, cfg);
  const bool ok = fa.dims() == 39 && fa.frames() == 1198 && fb.dims() == 39 && fb.frames() == 398;
  return {ok, Fmt("%zux%zu and %zux%zu", fa.dims(), fa.frames(), fb.dims(), fb.frames())};
}

std::string ReadAll(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TempDir run_a("accept_a"), run_b("accept_b");
ExperimentReport first_run;

Outcome EndToEnd() {
  const auto start = Clock::now();
  ExperimentConfig cfg;
  first_run = RunExperiment(cfg, run_a.path());
  const double secs = Seconds(start);
  const PopulationReport &p = first_run.populations.at(0);
  const double pca = p.pca->test, lda = p.lda_gmm->test, comb = p.combined->test;
  const double best_single = std::max(p.pca->validation, p.lda_gmm->validation);
  const bool ok = p.speakers == 20 && pca >= 0.90 && lda >= 0.90 && comb >= 0.90 &&
                  p.combined->validation >= best_single && secs < 300.0;
  return {ok, Fmt("S=%d test rates pca %.3f, lda-gmm %.3f (k*=%d), combined %.3f; "
                  "validation combined %.3f vs best single %.3f; %.1f s",
                  p.speakers, pca, lda, p.lda_k_star, comb, p.combined->validation, best_single,
                  secs)};
}

Outcome ChanceLevel() {
  ExperimentConfig cfg;
  cfg.synth.separation = 0.0;
  cfg.synth.test_clips = 10;
  cfg.lda_dims = {1, 2, 3, 4, 5, 6, 7, 8};
  cfg.order_sweep = {};
  cfg.pca_dim_sweep = false;
  ExperimentReport r = RunExperiment(cfg);
  const PopulationReport &p = r.populations.at(0);
  const double n = static_cast<double>(p.test_clips), chance = 1.0 / p.speakers;
  const double band = 3.0 * std::sqrt(chance * (1.0 - chance) / n);
  std::string detail = Fmt("%.0f test clips, band %.3f +- %.3f:", n, chance, band);
  bool ok = n == 200;
  for (auto [name, rates] : {std::pair{"pca", p.pca}, std::pair{"gmm", p.gmm_full},
                             std::pair{"lda-gmm", p.lda_gmm}, std::pair{"combined", p.combined}}) {
    ok = ok && rates && std::abs(rates->test - chance) <= band;
    detail += Fmt(" %s %.3f", name, rates ? rates->test : -1.0);
  }
  return {ok, detail};
}

Outcome Determinism() {
  ExperimentConfig cfg;
  RunExperiment(cfg, run_b.path());
  int compared = 0;
  std::string differing;
  for (const auto &entry : std::filesystem::directory_iterator(run_a.path())) {
    const std::string name = entry.path().filename().string();
    if (name == "timing.csv" || name == "timing.txt") continue;
    ++compared;
    if (ReadAll(entry.path()) != ReadAll(run_b / name)) differing += " " + name;
  }
  return {compared >= 5 && differing.empty(),
          Fmt("%d files compared%s%s", compared, differing.empty() ? "" : "; differ:",
              differing.c_str())};
}

}  // namespace

int main() {
  Report(1, "eigendecomposition invariants", EigenOracles);
  Report(2, "EM monotonicity and variance floor", EmMonotonicity);
  Report(3, "two-component mixture recovery", MixtureRecovery);
  Report(4, "brute-force equivalence", BruteForce);
  Report(5, "PCS/TES Pythagorean split", Pythagorean);
  Report(6, "endpoint reductions", Endpoints);
  Report(7, "frame counts", FrameCounts);
  Report(8, "end-to-end synthetic experiment", EndToEnd);
  Report(9, "chance-level control", ChanceLevel);
  Report(10, "determinism", Determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
