// spkr/lda.cc

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

#include "spkr/lda.h"

#include <algorithm>
#include <cstdio>

#include "spkr/envelope.h"
#include "spkr/errors.h"
#include "spkr/linalg.h"

namespace spkr {

ScatterPair ScatterMatrices(const std::vector<LabeledFeatures> &classes, GlobalMeanRule rule) {
  const std::size_t ns = classes.size();
  if (ns < 2)
    throw ArgumentError("ScatterMatrices: need at least 2 classes, got " + std::to_string(ns));
  const std::size_t m = classes.front().features.dims();
  for (const auto &c : classes) {
    if (c.features.dims() != m)
      throw ArgumentError("ScatterMatrices: class '" + c.speaker_id + "' has " +
                          std::to_string(c.features.dims()) + " dims, expected " +
                          std::to_string(m));
    if (c.features.frames() < 2)
      throw ArgumentError("ScatterMatrices: class '" + c.speaker_id + "' has fewer than 2 frames");
  }

  ScatterPair out;
  out.s_b = Matrix(m, m);
  out.s_w = Matrix(m, m);
  out.global_mean.assign(m, 0.0);
  std::size_t total_frames = 0;
  for (const auto &c : classes) {
    Vector mean(m, 0.0);
    const auto &x = c.features;
    for (std::size_t t = 0; t < x.frames(); ++t) {
      auto f = x.frame(t);
      for (std::size_t d = 0; d < m; ++d) mean[d] += f[d];
    }
    if (rule == GlobalMeanRule::kFrameWeighted)
      for (std::size_t d = 0; d < m; ++d) out.global_mean[d] += mean[d];
    total_frames += x.frames();
    for (double &v : mean) v /= static_cast<double>(x.frames());

    Matrix within = Covariance(x.values, mean);
    if (!(within.Trace() > 0.0))
      out.warnings.push_back("class '" + c.speaker_id +
                             "' has zero within-class variance; relying on the ridge");
    const double scale = 1.0 / (static_cast<double>(x.frames()) * static_cast<double>(ns));
    for (std::size_t i = 0; i < m * m; ++i) out.s_w.data()[i] += scale * within.data()[i];
    out.class_means.push_back(std::move(mean));
  }
  if (rule == GlobalMeanRule::kFrameWeighted) {
    for (double &v : out.global_mean) v /= static_cast<double>(total_frames);
  } else {
    for (const auto &mean : out.class_means)
      for (std::size_t d = 0; d < m; ++d) out.global_mean[d] += mean[d];
    for (double &v : out.global_mean) v /= static_cast<double>(ns);
  }

  Vector diff(m);
  for (const auto &mean : out.class_means) {
    for (std::size_t d = 0; d < m; ++d) diff[d] = mean[d] - out.global_mean[d];
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i < m; ++i) out.s_b(i, j) += diff[i] * diff[j] / ns;
  }
  return out;
}

double DefaultRidge(const ScatterPair &scatter) {
  return 1e-6 * scatter.s_w.Trace() / static_cast<double>(scatter.s_w.rows());
}

LdaBasis ComputeLdaBasis(const ScatterPair &scatter, int k, std::optional<double> ridge) {
  const std::size_t m = scatter.s_b.rows();
  if (k < 1 || static_cast<std::size_t>(k) > m)
    throw ArgumentError("ComputeLdaBasis: k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(m) + "]");
  LdaBasis basis;
  basis.ridge = ridge.value_or(DefaultRidge(scatter));
  basis.warnings = scatter.warnings;
  const std::size_t classes = scatter.class_means.size();
  if (classes >= 1 && static_cast<std::size_t>(k) > classes - 1)
    basis.warnings.push_back("requested " + std::to_string(k) +
                             " discriminant directions but S_B has rank <= " +
                             std::to_string(classes - 1));
  EigenResult eig = SolveGeneralizedEig(scatter.s_b, scatter.s_w, basis.ridge);
  basis.w = eig.vectors.Columns(0, k);
  basis.gen_eigenvalues.assign(eig.values.begin(), eig.values.begin() + k);
  return basis;
}

FeatureMatrix Project(const LdaBasis &basis, const FeatureMatrix &x) {
  if (x.dims() != basis.input_dims())
    throw ArgumentError("Project: features have " + std::to_string(x.dims()) +
                        " dims, basis expects " + std::to_string(basis.input_dims()));
  const std::size_t k = basis.output_dims();
  Matrix y(k, x.frames());
  for (std::size_t t = 0; t < x.frames(); ++t) {
    auto f = x.frame(t);
    auto out = y.col(t);
    for (std::size_t j = 0; j < k; ++j) out[j] = Dot(basis.w.col(j), f);
  }
  return FeatureMatrix(std::move(y), x.frame_rate_ms, x.window_ms, x.kind + "_LDA");
}

LdaBasis Truncate(const LdaBasis &basis, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > basis.output_dims())
    throw ArgumentError("Truncate: k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(basis.output_dims()) + "]");
  LdaBasis out;
  out.w = basis.w.Columns(0, k);
  out.gen_eigenvalues.assign(basis.gen_eigenvalues.begin(), basis.gen_eigenvalues.begin() + k);
  out.ridge = basis.ridge;
  out.warnings = basis.warnings;
  return out;
}

void SaveLdaBasis(const LdaBasis &basis, const std::filesystem::path &path) {
  Matrix vals(basis.output_dims(), 1), ridge(1, 1, basis.ridge);
  std::copy(basis.gen_eigenvalues.begin(), basis.gen_eigenvalues.end(), vals.data());
  WriteEnvelope(path, Envelope{PayloadKind::kLdaBasis, "lda", {basis.w, std::move(vals), ridge}});
}

LdaBasis LoadLdaBasis(const std::filesystem::path &path) {
  Envelope env = ReadEnvelope(path, PayloadKind::kLdaBasis);
  if (env.blocks.size() != 3 || env.blocks[1].cols() != 1 ||
      env.blocks[1].rows() != env.blocks[0].cols() || env.blocks[2].rows() != 1 ||
      env.blocks[2].cols() != 1 || env.blocks[0].cols() == 0)
    throw FormatError(path.string() + ": malformed LDA basis");
  LdaBasis basis;
  basis.w = env.blocks[0];
  basis.gen_eigenvalues.assign(env.blocks[1].values().begin(), env.blocks[1].values().end());
  basis.ridge = env.blocks[2](0, 0);
  return basis;
}

}  // namespace spkr
