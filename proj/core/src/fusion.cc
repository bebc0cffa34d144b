// spkr/fusion.cc

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

#include "spkr/fusion.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "spkr/errors.h"
#include "spkr/pca.h"

namespace spkr {

Vector NormalizeScores(const Vector &raw) {
  if (raw.empty()) throw ArgumentError("NormalizeScores: empty score vector");
  double ss = 0.0;
  for (double v : raw) ss += v * v;
  if (!(ss > 0.0)) throw ArgumentError("NormalizeScores: all-zero score vector");
  Vector out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / ss;
  return out;
}

Vector PrepareScores(const Vector &raw, FusionMode mode) {
  if (mode == FusionMode::kAsWritten) return NormalizeScores(raw);
  if (raw.empty()) throw ArgumentError("PrepareScores: empty score vector");
  const double mx = *std::max_element(raw.begin(), raw.end());
  Vector gap(raw.size());
  double top = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    gap[i] = mx - raw[i];
    top = std::max(top, gap[i]);
  }
  if (top == 0.0) return gap;
  // gap / sum(gap^2), evaluated as (gap/top) / (top * sum((gap/top)^2)) so
  // large log-likelihood gaps cannot overflow the sum of squares.
  double ss = 0.0;
  for (double &v : gap) {
    v /= top;
    ss += v * v;
  }
  const double denom = top * ss;
  for (double &v : gap) v /= denom;
  return gap;
}

std::size_t FusedDecision(const Vector &g1, const Vector &g2, double p, FusionMode mode) {
  if (g1.size() != g2.size() || g1.empty())
    throw ArgumentError("FusedDecision: score vectors differ in length (" +
                        std::to_string(g1.size()) + " vs " + std::to_string(g2.size()) + ")");
  std::size_t best = 0;
  double best_v = p * g1[0] + (1.0 - p) * g2[0];
  for (std::size_t s = 1; s < g1.size(); ++s) {
    const double v = p * g1[s] + (1.0 - p) * g2[s];
    if (mode == FusionMode::kMaxShifted ? v < best_v : v > best_v) {
      best_v = v;
      best = s;
    }
  }
  return best;
}

std::size_t ClassifyCombined(const Vector &g1, const Vector &g2, double p_star, FusionMode mode) {
  if (g1.size() != g2.size())
    throw ArgumentError("ClassifyCombined: score vectors differ in length (" +
                        std::to_string(g1.size()) + " vs " + std::to_string(g2.size()) + ")");
  if (!(p_star >= 0.0 && p_star <= 1.0))
    throw ArgumentError("ClassifyCombined: p_star must lie in [0, 1]");
  return FusedDecision(PrepareScores(g1, mode), PrepareScores(g2, mode), p_star, mode);
}

FusionWeights OptimizeWeight(const std::vector<Vector> &g1_scores,
                             const std::vector<Vector> &g2_scores,
                             const std::vector<std::size_t> &labels, double p_step,
                             FusionMode mode) {
  if (g1_scores.empty()) throw ArgumentError("OptimizeWeight: no clips");
  if (g1_scores.size() != g2_scores.size() || g1_scores.size() != labels.size())
    throw ArgumentError("OptimizeWeight: g1, g2 and labels must have equal clip counts");
  std::vector<Vector> n1, n2;
  n1.reserve(g1_scores.size());
  n2.reserve(g2_scores.size());
  for (std::size_t c = 0; c < g1_scores.size(); ++c) {
    n1.push_back(PrepareScores(g1_scores[c], mode));
    n2.push_back(PrepareScores(g2_scores[c], mode));
  }

  FusionWeights w;
  w.p_step = p_step;
  w.p_grid = ProbabilityGrid(p_step);
  w.rate_curve.resize(w.p_grid.size());
  const double clips = static_cast<double>(labels.size());
  for (std::size_t i = 0; i < w.p_grid.size(); ++i) {
    int ok = 0;
    for (std::size_t c = 0; c < labels.size(); ++c)
      ok += FusedDecision(n1[c], n2[c], w.p_grid[i], mode) == labels[c];
    w.rate_curve[i] = ok / clips;
  }

  const double best = *std::max_element(w.rate_curve.begin(), w.rate_curve.end());
  std::vector<std::size_t> winners;
  for (std::size_t i = 0; i < w.rate_curve.size(); ++i)
    if (w.rate_curve[i] == best) winners.push_back(i);
  w.rate = best;
  w.p_lo = w.p_grid[winners.front()];
  w.p_hi = w.p_grid[winners.back()];
  const std::size_t mid = winners.size() / 2;
  w.p_star = winners.size() % 2 == 1 ? w.p_grid[winners[mid]]
                                     : 0.5 * (w.p_grid[winners[mid - 1]] + w.p_grid[winners[mid]]);
  return w;
}

std::string FusionCurveCsv(const FusionWeights &w) {
  std::string out = "p,rate\n";
  char buf[64];
  for (std::size_t i = 0; i < w.p_grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.4f,%.6f\n", w.p_grid[i], w.rate_curve[i]);
    out += buf;
  }
  return out;
}

}  // namespace spkr
