// spkr/pca.h

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

#ifndef SPKR_PCA_H_
#define SPKR_PCA_H_

// Per-speaker eigenspace classifiers.
//
// Each enrolled speaker s gets a mean Psi_s and an orthonormal basis U_s of
// the eigenvectors of its (unnormalized) feature covariance, ordered by
// descending eigenvalue. For a test sequence X with frames x_t and
// Phi_t = x_t - Psi_s:
//
//   g_PCS(X | k_p) = sum_t || U_s[:, 0 .. k_p)^T Phi_t ||      (largest k_p)
//   g_TES(X | k_t) = sum_t || U_s[:, K-k_t .. K)^T Phi_t ||    (smallest k_t)
//
// and the mixed decision is argmax_s p * g_PCS - (1 - p) * g_TES. The TES
// always takes the k_t smallest-eigenvalue directions, independent of k_p.
// Ties in every argmax go to the lowest speaker index.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "spkr/features.h"
#include "spkr/matrix.h"

namespace spkr {

struct SpeakerEigenspace {
  std::string speaker_id;
  Vector mean;        // Psi, length M
  Matrix basis;       // M x K, orthonormal columns
  Vector eigenvalues; // length K, descending, clamped at 0

  std::size_t dims() const { return mean.size(); }
  std::size_t rank() const { return basis.cols(); }
};

struct PcaParams {
  int k_p = 1;
  int k_t = 1;
  double p = 0.5;

  // Throws ArgumentError unless 1 <= k_p, 1 <= k_t, k_p + k_t <= rank and
  // p in [0, 1].
  void Validate(std::size_t rank) const;
};

struct LabeledFeatures {
  std::string speaker_id;
  FeatureMatrix features;
};

struct Decision {
  std::size_t speaker_index = 0;
  std::string speaker_id;
  Vector scores;  // one per model, higher is better
};

// Psi = per-row mean over frames; basis from SymEigendecomp(Covariance)
// truncated to K = min(M, T). NumericError (naming the speaker) when every
// frame is identical.
SpeakerEigenspace TrainEigenspace(const std::string &speaker_id, const FeatureMatrix &features);

double ScorePcs(const SpeakerEigenspace &model, const FeatureMatrix &x, int k_p);
double ScoreTes(const SpeakerEigenspace &model, const FeatureMatrix &x, int k_t);

Decision ClassifyMixed(const std::vector<SpeakerEigenspace> &models, const FeatureMatrix &x,
                       const PcaParams &params);

// Index of the model whose speaker_id matches, or ArgumentError.
std::size_t FindSpeaker(const std::vector<SpeakerEigenspace> &models, const std::string &id);

/// One maximal run of p values (at the search resolution) that reaches the
/// best rate for a fixed (k_p, k_t).
struct GridPoint {
  int k_p = 0;
  int k_t = 0;
  double p_lo = 0.0;
  double p_hi = 0.0;
  int count = 0;  // grid points inside [p_lo, p_hi]

  int total_dim() const { return k_p + k_t; }
  double p_mid() const { return 0.5 * (p_lo + p_hi); }
  friend bool operator==(const GridPoint &, const GridPoint &) = default;
};

struct GridSearchResult {
  double best_rate = 0.0;
  int k_max = 0;
  double p_step = 0.01;
  // Sorted by total_dim, then k_p, then p_lo.
  std::vector<GridPoint> points;

  // Cheapest maximizer: first point, with p at the centre of its run.
  PcaParams Best() const;
};

struct GridSearchOptions {
  int k_max = 0;        // 0 -> floor(min(M, K) / 2)
  double p_step = 0.01;
  unsigned threads = 0;
};

// p values searched for a step: i / n for i = 0..n with n = round(1 / step).
std::vector<double> ProbabilityGrid(double p_step);

/// Exhaustive search over k_p, k_t in [1, k_max] and the p grid. PCS/TES
/// scores are computed once per (clip, speaker, dimension) and reused for
/// every p, so the cost is dominated by one projection pass.
GridSearchResult GridSearch(const std::vector<SpeakerEigenspace> &models,
                            const std::vector<LabeledFeatures> &validation,
                            const GridSearchOptions &options = {});

struct DimensionSweepResult {
  std::vector<int> dims;
  Vector pcs_rate;
  Vector tes_rate;
  Vector mixed_rate;  // p = 0.5, k_p = k_t = dim
};

// Rate curves over dim = 1..K for the pure PCS, pure TES and the p = 0.5
// mixture with k_p = k_t = dim (the two subspaces may overlap past K / 2).
DimensionSweepResult DimensionSweep(const std::vector<SpeakerEigenspace> &models,
                                    const std::vector<LabeledFeatures> &validation,
                                    unsigned threads = 0);

void SaveEigenspace(const SpeakerEigenspace &model, const std::filesystem::path &path);
SpeakerEigenspace LoadEigenspace(const std::filesystem::path &path);

// CSV with header k_p,k_t,p_lo,p_hi,total_dim,rate,points.
std::string GridSearchCsv(const GridSearchResult &result);
std::string DimensionSweepCsv(const DimensionSweepResult &sweep);

}  // namespace spkr

#endif  // SPKR_PCA_H_
