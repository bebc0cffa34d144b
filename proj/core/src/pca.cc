// spkr/pca.cc

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

#include "spkr/pca.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spkr/envelope.h"
#include "spkr/errors.h"
#include "spkr/linalg.h"
#include "spkr/parallel.h"

namespace spkr {

namespace {

// Coordinate of Phi along basis column j. Every scoring path goes through
// this helper with the same accumulation order, so cached and direct scores
// agree bit for bit.
inline double Coordinate(const SpeakerEigenspace &model, std::span<const double> phi,
                         std::size_t j) {
  return Dot(model.basis.col(j), phi);
}

void MeanShift(const SpeakerEigenspace &model, std::span<const double> x, Vector &phi) {
  for (std::size_t d = 0; d < phi.size(); ++d) phi[d] = x[d] - model.mean[d];
}

void CheckInput(const SpeakerEigenspace &model, const FeatureMatrix &x, const char *who) {
  if (x.dims() != model.dims())
    throw ArgumentError(std::string(who) + ": features have " + std::to_string(x.dims()) +
                        " dims but model '" + model.speaker_id + "' has " +
                        std::to_string(model.dims()));
}

void CheckDim(int k, const SpeakerEigenspace &model, const char *who) {
  if (k < 1 || static_cast<std::size_t>(k) > model.rank())
    throw ArgumentError(std::string(who) + ": dimension " + std::to_string(k) +
                        " outside [1, " + std::to_string(model.rank()) + "]");
}

inline std::size_t ArgMax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline std::size_t ArgMin(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

inline double MixedScore(double p, double pcs, double tes) { return p * pcs - (1.0 - p) * tes; }

// pcs[k] and tes[k] for k = 1..cap of every (clip, speaker) pair.
class ScoreCache {
 public:
  ScoreCache(const std::vector<SpeakerEigenspace> &models,
             const std::vector<LabeledFeatures> &clips, int cap, unsigned threads)
      : speakers_(models.size()), cap_(cap),
        pcs_(clips.size() * speakers_ * (cap + 1), 0.0),
        tes_(clips.size() * speakers_ * (cap + 1), 0.0) {
    ParallelFor(clips.size() * speakers_, threads, [&](std::size_t cell) {
      const std::size_t c = cell / speakers_, s = cell % speakers_;
      Fill(models[s], clips[c].features, &pcs_[cell * (cap_ + 1)], &tes_[cell * (cap_ + 1)]);
    });
  }

  double pcs(std::size_t clip, std::size_t s, int k) const {
    return pcs_[(clip * speakers_ + s) * (cap_ + 1) + k];
  }
  double tes(std::size_t clip, std::size_t s, int k) const {
    return tes_[(clip * speakers_ + s) * (cap_ + 1) + k];
  }

 private:
  void Fill(const SpeakerEigenspace &model, const FeatureMatrix &x, double *pcs,
            double *tes) const {
    const std::size_t big_k = model.rank();
    Vector phi(model.dims()), coord(big_k);
    for (std::size_t t = 0; t < x.frames(); ++t) {
      MeanShift(model, x.frame(t), phi);
      for (int j = 0; j < cap_; ++j) coord[j] = Coordinate(model, phi, j);
      for (std::size_t j = big_k - cap_; j < big_k; ++j)
        if (j >= static_cast<std::size_t>(cap_)) coord[j] = Coordinate(model, phi, j);
      double acc = 0.0;
      for (int j = 0; j < cap_; ++j) {
        acc += coord[j] * coord[j];
        pcs[j + 1] += std::sqrt(acc);
      }
      acc = 0.0;
      for (int k = 1; k <= cap_; ++k) {
        const double c = coord[big_k - k];
        acc += c * c;
        tes[k] += std::sqrt(acc);
      }
    }
  }

  std::size_t speakers_;
  int cap_;
  std::vector<double> pcs_;
  std::vector<double> tes_;
};

std::vector<std::size_t> Labels(const std::vector<SpeakerEigenspace> &models,
                                const std::vector<LabeledFeatures> &clips) {
  std::vector<std::size_t> labels;
  labels.reserve(clips.size());
  for (const auto &c : clips) {
    labels.push_back(FindSpeaker(models, c.speaker_id));
    CheckInput(models[labels.back()], c.features, "validation");
  }
  return labels;
}

std::size_t MinRank(const std::vector<SpeakerEigenspace> &models) {
  std::size_t k = models.front().rank();
  for (const auto &m : models) {
    if (m.dims() != models.front().dims())
      throw ArgumentError("eigenspace models disagree on feature dimension");
    k = std::min(k, m.rank());
  }
  return k;
}

}  // namespace

void PcaParams::Validate(std::size_t rank) const {
  if (k_p < 1 || k_t < 1 || static_cast<std::size_t>(k_p + k_t) > rank)
    throw ArgumentError("PcaParams: need 1 <= k_p, 1 <= k_t, k_p + k_t <= " +
                        std::to_string(rank) + " (got k_p=" + std::to_string(k_p) +
                        ", k_t=" + std::to_string(k_t) + ")");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("PcaParams: p must lie in [0, 1]");
}

SpeakerEigenspace TrainEigenspace(const std::string &speaker_id, const FeatureMatrix &features) {
  const std::size_t m = features.dims(), t = features.frames();
  if (m == 0 || t < 2)
    throw ArgumentError("TrainEigenspace(" + speaker_id + "): need at least 2 frames, got " +
                        std::to_string(t));
  SpeakerEigenspace model;
  model.speaker_id = speaker_id;
  model.mean.assign(m, 0.0);
  for (std::size_t i = 0; i < t; ++i) {
    auto x = features.frame(i);
    for (std::size_t d = 0; d < m; ++d) model.mean[d] += x[d];
  }
  for (double &v : model.mean) v /= static_cast<double>(t);

  const Matrix cov = Covariance(features.values, model.mean);
  if (!(cov.Trace() > 0.0))
    throw NumericError("TrainEigenspace(" + speaker_id +
                       "): degenerate enrollment data (all frames identical)");
  EigenResult eig = SymEigendecomp(cov);
  const std::size_t k = std::min(m, t);
  model.basis = eig.vectors.Columns(0, k);
  model.eigenvalues.assign(eig.values.begin(), eig.values.begin() + k);
  for (double &v : model.eigenvalues) v = std::max(v, 0.0);
  return model;
}

double ScorePcs(const SpeakerEigenspace &model, const FeatureMatrix &x, int k_p) {
  CheckInput(model, x, "ScorePcs");
  CheckDim(k_p, model, "ScorePcs");
  Vector phi(model.dims());
  double total = 0.0;
  for (std::size_t t = 0; t < x.frames(); ++t) {
    MeanShift(model, x.frame(t), phi);
    double acc = 0.0;
    for (int j = 0; j < k_p; ++j) {
      const double c = Coordinate(model, phi, j);
      acc += c * c;
    }
    total += std::sqrt(acc);
  }
  return total;
}

double ScoreTes(const SpeakerEigenspace &model, const FeatureMatrix &x, int k_t) {
  CheckInput(model, x, "ScoreTes");
  CheckDim(k_t, model, "ScoreTes");
  const std::size_t big_k = model.rank();
  Vector phi(model.dims());
  double total = 0.0;
  for (std::size_t t = 0; t < x.frames(); ++t) {
    MeanShift(model, x.frame(t), phi);
    double acc = 0.0;
    for (int k = 1; k <= k_t; ++k) {
      const double c = Coordinate(model, phi, big_k - k);
      acc += c * c;
    }
    total += std::sqrt(acc);
  }
  return total;
}

std::size_t FindSpeaker(const std::vector<SpeakerEigenspace> &models, const std::string &id) {
  for (std::size_t s = 0; s < models.size(); ++s)
    if (models[s].speaker_id == id) return s;
  throw ArgumentError("no eigenspace model for speaker '" + id + "'");
}

Decision ClassifyMixed(const std::vector<SpeakerEigenspace> &models, const FeatureMatrix &x,
                       const PcaParams &params) {
  if (models.empty()) throw ArgumentError("ClassifyMixed: empty model list");
  for (const auto &m : models) {
    CheckInput(m, x, "ClassifyMixed");
    params.Validate(m.rank());
  }
  Decision d;
  d.scores.resize(models.size());
  for (std::size_t s = 0; s < models.size(); ++s)
    d.scores[s] = MixedScore(params.p, ScorePcs(models[s], x, params.k_p),
                             ScoreTes(models[s], x, params.k_t));
  d.speaker_index = ArgMax(d.scores);
  d.speaker_id = models[d.speaker_index].speaker_id;
  return d;
}

std::vector<double> ProbabilityGrid(double p_step) {
  if (!(p_step > 0.0 && p_step <= 1.0))
    throw ArgumentError("p_step must lie in (0, 1]");
  const long n = std::lround(1.0 / p_step);
  std::vector<double> grid(n + 1);
  for (long i = 0; i <= n; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(n);
  return grid;
}

PcaParams GridSearchResult::Best() const {
  if (points.empty()) throw ArgumentError("GridSearchResult::Best: no points");
  const GridPoint &g = points.front();
  // Median of the run's grid points.
  const long n = std::lround(1.0 / p_step);
  const long lo = std::lround(g.p_lo * n), hi = std::lround(g.p_hi * n);
  return PcaParams{g.k_p, g.k_t, static_cast<double>(lo + hi) / static_cast<double>(2 * n)};
}

GridSearchResult GridSearch(const std::vector<SpeakerEigenspace> &models,
                            const std::vector<LabeledFeatures> &validation,
                            const GridSearchOptions &options) {
  if (models.empty()) throw ArgumentError("GridSearch: empty model list");
  if (validation.empty()) throw ArgumentError("GridSearch: empty validation set");
  const std::size_t min_rank = MinRank(models);
  const auto labels = Labels(models, validation);
  const int auto_max = static_cast<int>(std::min(models.front().dims(), min_rank) / 2);
  const int k_max = options.k_max > 0 ? options.k_max : auto_max;
  if (k_max < 1 || static_cast<std::size_t>(2 * k_max) > min_rank)
    throw ArgumentError("GridSearch: k_max " + std::to_string(k_max) +
                        " is incompatible with model rank " + std::to_string(min_rank));
  const auto grid = ProbabilityGrid(options.p_step);
  const std::size_t np = grid.size(), nclips = validation.size(), ns = models.size();

  const ScoreCache cache(models, validation, k_max, options.threads);

  // correct[(k_p - 1) * k_max + (k_t - 1)][i]
  const std::size_t pairs = static_cast<std::size_t>(k_max) * k_max;
  std::vector<std::vector<int>> correct(pairs, std::vector<int>(np, 0));
  ParallelFor(pairs, options.threads, [&](std::size_t pair) {
    const int k_p = static_cast<int>(pair / k_max) + 1, k_t = static_cast<int>(pair % k_max) + 1;
    auto &row = correct[pair];
    for (std::size_t c = 0; c < nclips; ++c) {
      for (std::size_t i = 0; i < np; ++i) {
        const double p = grid[i];
        std::size_t best = 0;
        double best_score = MixedScore(p, cache.pcs(c, 0, k_p), cache.tes(c, 0, k_t));
        for (std::size_t s = 1; s < ns; ++s) {
          const double v = MixedScore(p, cache.pcs(c, s, k_p), cache.tes(c, s, k_t));
          if (v > best_score) {
            best_score = v;
            best = s;
          }
        }
        if (best == labels[c]) ++row[i];
      }
    }
  });

  int best_count = 0;
  for (const auto &row : correct) best_count = std::max(best_count, *std::max_element(row.begin(), row.end()));

  GridSearchResult result;
  result.k_max = k_max;
  result.p_step = options.p_step;
  result.best_rate = static_cast<double>(best_count) / static_cast<double>(nclips);
  for (std::size_t pair = 0; pair < pairs; ++pair) {
    const auto &row = correct[pair];
    for (std::size_t i = 0; i < np;) {
      if (row[i] != best_count) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < np && row[j + 1] == best_count) ++j;
      result.points.push_back(GridPoint{static_cast<int>(pair / k_max) + 1,
                                        static_cast<int>(pair % k_max) + 1, grid[i], grid[j],
                                        static_cast<int>(j - i + 1)});
      i = j + 1;
    }
  }
  std::stable_sort(result.points.begin(), result.points.end(),
                   [](const GridPoint &a, const GridPoint &b) {
                     if (a.total_dim() != b.total_dim()) return a.total_dim() < b.total_dim();
                     if (a.k_p != b.k_p) return a.k_p < b.k_p;
                     return a.p_lo < b.p_lo;
                   });
  return result;
}

DimensionSweepResult DimensionSweep(const std::vector<SpeakerEigenspace> &models,
                                    const std::vector<LabeledFeatures> &validation,
                                    unsigned threads) {
  if (models.empty()) throw ArgumentError("DimensionSweep: empty model list");
  if (validation.empty()) throw ArgumentError("DimensionSweep: empty validation set");
  const int big_k = static_cast<int>(MinRank(models));
  const auto labels = Labels(models, validation);
  const ScoreCache cache(models, validation, big_k, threads);
  const std::size_t ns = models.size(), nclips = validation.size();

  DimensionSweepResult out;
  Vector pcs(ns), tes(ns), mix(ns);
  for (int k = 1; k <= big_k; ++k) {
    int ok_pcs = 0, ok_tes = 0, ok_mix = 0;
    for (std::size_t c = 0; c < nclips; ++c) {
      for (std::size_t s = 0; s < ns; ++s) {
        pcs[s] = cache.pcs(c, s, k);
        tes[s] = cache.tes(c, s, k);
        mix[s] = MixedScore(0.5, pcs[s], tes[s]);
      }
      ok_pcs += ArgMax(pcs) == labels[c];
      ok_tes += ArgMin(tes) == labels[c];
      ok_mix += ArgMax(mix) == labels[c];
    }
    out.dims.push_back(k);
    out.pcs_rate.push_back(static_cast<double>(ok_pcs) / nclips);
    out.tes_rate.push_back(static_cast<double>(ok_tes) / nclips);
    out.mixed_rate.push_back(static_cast<double>(ok_mix) / nclips);
  }
  return out;
}

void SaveEigenspace(const SpeakerEigenspace &model, const std::filesystem::path &path) {
  Matrix mean(model.dims(), 1), vals(model.rank(), 1);
  std::copy(model.mean.begin(), model.mean.end(), mean.data());
  std::copy(model.eigenvalues.begin(), model.eigenvalues.end(), vals.data());
  WriteEnvelope(path, Envelope{PayloadKind::kEigenspace, model.speaker_id,
                               {std::move(mean), std::move(vals), model.basis}});
}

SpeakerEigenspace LoadEigenspace(const std::filesystem::path &path) {
  Envelope env = ReadEnvelope(path, PayloadKind::kEigenspace);
  if (env.blocks.size() != 3)
    throw FormatError(path.string() + ": eigenspace needs mean, eigenvalue and basis blocks");
  const Matrix &mean = env.blocks[0], &vals = env.blocks[1], &basis = env.blocks[2];
  if (mean.cols() != 1 || vals.cols() != 1 || basis.rows() != mean.rows() ||
      basis.cols() != vals.rows() || basis.cols() == 0)
    throw FormatError(path.string() + ": eigenspace block dimensions are inconsistent");
  SpeakerEigenspace model;
  model.speaker_id = env.label;
  model.mean.assign(mean.values().begin(), mean.values().end());
  model.eigenvalues.assign(vals.values().begin(), vals.values().end());
  model.basis = basis;
  return model;
}

std::string GridSearchCsv(const GridSearchResult &result) {
  std::string out = "k_p,k_t,p_lo,p_hi,total_dim,rate,points\n";
  char buf[160];
  for (const auto &g : result.points) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.4f,%.4f,%d,%.6f,%d\n", g.k_p, g.k_t, g.p_lo,
                  g.p_hi, g.total_dim(), result.best_rate, g.count);
    out += buf;
  }
  return out;
}

std::string DimensionSweepCsv(const DimensionSweepResult &sweep) {
  std::string out = "dim,pcs_rate,tes_rate,mixed_rate\n";
  char buf[128];
  for (std::size_t i = 0; i < sweep.dims.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f\n", sweep.dims[i], sweep.pcs_rate[i],
                  sweep.tes_rate[i], sweep.mixed_rate[i]);
    out += buf;
  }
  return out;
}

}  // namespace spkr
