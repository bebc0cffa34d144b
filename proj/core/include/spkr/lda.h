// spkr/lda.h

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

#ifndef SPKR_LDA_H_
#define SPKR_LDA_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spkr/features.h"
#include "spkr/matrix.h"
#include "spkr/pca.h"

namespace spkr {

enum class GlobalMeanRule {
  kMeanOfClassMeans,  // unweighted: every class counts once
  kFrameWeighted,     // pooled mean over all frames
};

// S_B = (1/S) sum_s (m_s - m)(m_s - m)^T
// S_W = (1/S) sum_s (1/T_s) sum_t (x_t - m_s)(x_t - m_s)^T
struct ScatterPair {
  Matrix s_b;
  Matrix s_w;
  Vector global_mean;
  std::vector<Vector> class_means;
  std::vector<std::string> warnings;
};

struct LdaBasis {
  Matrix w;                  // M x k, unit-norm columns
  Vector gen_eigenvalues;    // length k, descending
  double ridge = 0.0;
  std::vector<std::string> warnings;

  std::size_t input_dims() const { return w.rows(); }
  std::size_t output_dims() const { return w.cols(); }
};

// Classes are accumulated in the given order. Needs >= 2 classes with >= 2
// frames each and a shared dimension (ArgumentError otherwise). A class with
// zero within-class variance is reported in `warnings`, not rejected.
ScatterPair ScatterMatrices(const std::vector<LabeledFeatures> &classes,
                            GlobalMeanRule rule = GlobalMeanRule::kMeanOfClassMeans);

// 1e-6 * trace(S_W) / M.
double DefaultRidge(const ScatterPair &scatter);

/// Top-k solutions of S_B w = lambda (S_W + ridge I) w. With no ridge given,
/// DefaultRidge is used. S_B has rank at most S - 1, so asking for more
/// directions than that adds a warning: the extra eigenvalues are ~0 and
/// their directions are arbitrary within the null space.
LdaBasis ComputeLdaBasis(const ScatterPair &scatter, int k, std::optional<double> ridge = {});

// Y = W^T X.
FeatureMatrix Project(const LdaBasis &basis, const FeatureMatrix &x);
// First k columns of a wider basis; lets a dimension sweep solve once.
LdaBasis Truncate(const LdaBasis &basis, int k);

void SaveLdaBasis(const LdaBasis &basis, const std::filesystem::path &path);
LdaBasis LoadLdaBasis(const std::filesystem::path &path);

}  // namespace spkr

#endif  // SPKR_LDA_H_
