// spkr/fusion.h

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

#ifndef SPKR_FUSION_H_
#define SPKR_FUSION_H_

// Score-level fusion of the eigenspace (g1) and LDA-GMM (g2) classifiers.
//
// Each per-clip score vector is scaled by the reciprocal of its sum of
// squares (not its Euclidean norm) and the two are mixed linearly:
//   fused_s = p * g1_s / sum(g1^2) + (1 - p) * g2_s / sum(g2^2).
//
// Log-likelihood vectors are negative, and dividing a mixed-sign or
// negative vector by its sum of squares can reorder it. The default mode
// therefore first rewrites each vector as its distance below the maximum
// (max - g_s >= 0, zero for the winner), normalizes that, and picks the
// smallest fused value. This keeps each classifier's own decision intact at
// p = 0 and p = 1. kAsWritten applies the scaling to the raw vectors and
// takes the argmax.

#include <string>
#include <vector>

#include "spkr/matrix.h"

namespace spkr {

enum class FusionMode { kMaxShifted, kAsWritten };

struct FusionWeights {
  double p_star = 0.5;
  double p_lo = 0.0;
  double p_hi = 1.0;
  double rate = 0.0;  // validation rate at p_star
  double p_step = 0.0025;
  std::vector<double> p_grid;
  std::vector<double> rate_curve;
};

// raw / sum(raw^2). ArgumentError for an empty or all-zero vector.
Vector NormalizeScores(const Vector &raw);

// The vector actually fused under `mode`. In kMaxShifted mode an all-equal
// input carries no preference and becomes all zeros.
Vector PrepareScores(const Vector &raw, FusionMode mode);

// Decision on already-prepared vectors; lowest index wins ties.
std::size_t FusedDecision(const Vector &g1, const Vector &g2, double p, FusionMode mode);

/// Combined classifier on raw score vectors (higher is better for both).
std::size_t ClassifyCombined(const Vector &g1, const Vector &g2, double p_star,
                             FusionMode mode = FusionMode::kMaxShifted);

/// Sweeps p over i / n (n = round(1 / p_step)) including both endpoints,
/// computes the validation rate r(p) of the combined decision, and returns
/// the extent of the maximizing set with its median as p_star.
FusionWeights OptimizeWeight(const std::vector<Vector> &g1_scores,
                             const std::vector<Vector> &g2_scores,
                             const std::vector<std::size_t> &labels, double p_step = 0.0025,
                             FusionMode mode = FusionMode::kMaxShifted);

// CSV with header p,rate.
std::string FusionCurveCsv(const FusionWeights &w);

}  // namespace spkr

#endif  // SPKR_FUSION_H_
