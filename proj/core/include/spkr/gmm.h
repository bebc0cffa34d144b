// spkr/gmm.h

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

#ifndef SPKR_GMM_H_
#define SPKR_GMM_H_

// Diagonal-covariance Gaussian mixtures for speaker modelling.
//
// All density evaluation happens in the log domain; a 39-dimensional
// product of Gaussian densities underflows a double long before the
// mixture sum is taken.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "spkr/features.h"
#include "spkr/matrix.h"

namespace spkr {

struct GmmParams {
  Vector weights;    // length N, on the simplex
  Matrix means;      // M x N, column i = mean of component i
  Matrix variances;  // M x N, diagonal covariances

  std::size_t order() const { return weights.size(); }
  std::size_t dims() const { return means.rows(); }
  // Throws ArgumentError if shapes disagree, weights leave the simplex
  // (tolerance 1e-10) or any variance is non-positive.
  void Validate() const;
};

enum class EmStop { kConverged, kIterationCap };

struct EmTrace {
  // Entry 0 is the log-likelihood of the initial model, entry i the model
  // after i EM iterations.
  Vector log_likelihoods;
  int iterations = 0;
  EmStop reason = EmStop::kIterationCap;
  std::vector<std::string> events;  // component resets, with iteration index
};

struct EmConfig {
  int max_iters = 100;
  double ll_epsilon = 1e-3;
  // Per-dimension floor Var_d(X) / T^2; set false to disable the data-driven
  // floor (the absolute min_variance still applies).
  bool variance_floor = true;
  // Also floor the initial variances before the first E-step.
  bool floor_initial = false;
  double min_variance = 1e-10;
  std::uint64_t seed = 1;  // frame choice when a component collapses

  void Validate() const;
};

/// N means taken from frames floor((j + 0.5) * T / N), j = 0..N-1; unit
/// variances; weights 1/N. Throws ArgumentError when T < N or N < 1.
GmmParams InitGmm(const FeatureMatrix &x, int order);

// log b_i(x) for diagonal component i.
double LogComponentDensity(const GmmParams &params, std::size_t i, std::span<const double> x);
// b_i(x) = exp(LogComponentDensity).
double ComponentDensity(const GmmParams &params, std::size_t i, std::span<const double> x);

// Per-dimension floor max(Var_d(X) / T^2, min_variance) used by EmFit.
Vector VarianceFloor(const FeatureMatrix &x, const EmConfig &cfg);

/// Maximum-likelihood EM. Each iteration computes posteriors, re-estimates
/// weights/means/variances (variance = E[x^2] - mean^2 with the new mean),
/// then floors every variance dimension. Stops when the log-likelihood gain
/// falls below ll_epsilon or after max_iters iterations. A component whose
/// posterior mass drops below 1e-300 is re-seeded on a random frame with the
/// data variance and weight 1/N (weights renormalized), and the event is
/// logged in the trace.
std::pair<GmmParams, EmTrace> EmFit(const FeatureMatrix &x, const GmmParams &init,
                                    const EmConfig &cfg = {});

// sum_t log sum_i p_i b_i(x_t), log-sum-exp per frame, compensated sum over
// frames.
double LogLikelihood(const GmmParams &params, const FeatureMatrix &x);

// Posterior p(i | x, lambda) for every component.
Vector Posteriors(const GmmParams &params, std::span<const double> x);

struct SpeakerGmm {
  std::string speaker_id;
  GmmParams params;
};

struct GmmDecision {
  std::size_t speaker_index = 0;
  std::string speaker_id;
  Vector scores;  // log-likelihood under each model
};

GmmDecision ClassifyGmm(const std::vector<SpeakerGmm> &models, const FeatureMatrix &x);

struct DimensionRate {
  int k = 0;
  double rate = 0.0;
};

// argmin over entries of (1 - rate) * k, ties to the smallest k.
int JointOptimalDimension(const std::vector<DimensionRate> &rates);
// argmax of rate, ties to the smallest k.
int AccuracyOptimalDimension(const std::vector<DimensionRate> &rates);

void SaveGmm(const SpeakerGmm &model, const std::filesystem::path &path);
SpeakerGmm LoadGmm(const std::filesystem::path &path);

// CSV with header iteration,log_likelihood.
std::string EmTraceCsv(const EmTrace &trace);

}  // namespace spkr

#endif  // SPKR_GMM_H_
