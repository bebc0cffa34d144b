// spkr/gmm.cc

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

#include "spkr/gmm.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "spkr/envelope.h"
#include "spkr/errors.h"

namespace spkr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)
constexpr double kCollapseMass = 1e-300;

// Neumaier-compensated running sum; keeps frame-order effects far below
// the 1e-9 level even for long utterances.
class CompensatedSum {
 public:
  void Add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Per-component constants for fast log-density evaluation.
struct Precomputed {
  Vector log_norm;   // log p_i - 0.5 (M log 2pi + sum_d log var_id)
  Matrix inv_var;    // M x N
};

Precomputed Prepare(const GmmParams &g) {
  Precomputed pc;
  const std::size_t n = g.order(), m = g.dims();
  pc.log_norm.resize(n);
  pc.inv_var = Matrix(m, n);
  for (std::size_t i = 0; i < n; ++i) {
    double log_det = 0.0;
    auto var = g.variances.col(i);
    auto inv = pc.inv_var.col(i);
    for (std::size_t d = 0; d < m; ++d) {
      log_det += std::log(var[d]);
      inv[d] = 1.0 / var[d];
    }
    const double lw = g.weights[i] > 0.0 ? std::log(g.weights[i])
                                         : -std::numeric_limits<double>::infinity();
    pc.log_norm[i] = lw - 0.5 * (static_cast<double>(m) * kLog2Pi + log_det);
  }
  return pc;
}

// Fills lp[i] = log p_i + log b_i(x) and returns max_i lp[i].
double ComponentLogProbs(const GmmParams &g, const Precomputed &pc, std::span<const double> x,
                         double *lp) {
  const std::size_t n = g.order(), m = g.dims();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    auto mu = g.means.col(i);
    auto inv = pc.inv_var.col(i);
    double q = 0.0;
    for (std::size_t d = 0; d < m; ++d) {
      const double diff = x[d] - mu[d];
      q += diff * diff * inv[d];
    }
    lp[i] = pc.log_norm[i] - 0.5 * q;
    mx = std::max(mx, lp[i]);
  }
  return mx;
}

// log sum_i p_i b_i(x); lp is scratch of length N.
double FrameLogProb(const GmmParams &g, const Precomputed &pc, std::span<const double> x,
                    double *lp) {
  const double mx = ComponentLogProbs(g, pc, x, lp);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t i = 0; i < g.order(); ++i) s += std::exp(lp[i] - mx);
  return mx + std::log(s);
}

// Same value, leaving the posteriors p(i | x) in post.
double FramePosteriors(const GmmParams &g, const Precomputed &pc, std::span<const double> x,
                       double *post) {
  const std::size_t n = g.order();
  const double mx = ComponentLogProbs(g, pc, x, post);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (post[i] = std::exp(post[i] - mx));
  for (std::size_t i = 0; i < n; ++i) post[i] /= s;
  return mx + std::log(s);
}

// Per-dimension population variance of the frames.
Vector DataVariance(const FeatureMatrix &x) {
  const std::size_t m = x.dims(), t = x.frames();
  Vector var(m, 0.0);
  const double tt = static_cast<double>(t);
  for (std::size_t d = 0; d < m; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < t; ++i) mean += x.values(d, i);
    mean /= tt;
    for (std::size_t i = 0; i < t; ++i) {
      const double diff = x.values(d, i) - mean;
      var[d] += diff * diff;
    }
    var[d] /= tt;
  }
  return var;
}

void CheckDims(const GmmParams &g, const FeatureMatrix &x, const char *who) {
  if (x.dims() != g.dims())
    throw ArgumentError(std::string(who) + ": features have " + std::to_string(x.dims()) +
                        " dims but the model has " + std::to_string(g.dims()));
}

}  // namespace

void GmmParams::Validate() const {
  const std::size_t n = order();
  if (n == 0) throw ArgumentError("GmmParams: no components");
  if (means.cols() != n || variances.cols() != n || variances.rows() != means.rows() ||
      means.rows() == 0)
    throw ArgumentError("GmmParams: inconsistent shapes");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("GmmParams: invalid weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-10)
    throw ArgumentError("GmmParams: weights sum to " + std::to_string(sum));
  for (double v : variances.values())
    if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError("GmmParams: non-positive variance");
  if (!means.AllFinite()) throw ArgumentError("GmmParams: non-finite mean");
}

void EmConfig::Validate() const {
  if (max_iters < 1) throw ArgumentError("EmConfig: max_iters must be >= 1");
  if (!(ll_epsilon > 0.0)) throw ArgumentError("EmConfig: ll_epsilon must be > 0");
  if (!(min_variance > 0.0)) throw ArgumentError("EmConfig: min_variance must be > 0");
}

GmmParams InitGmm(const FeatureMatrix &x, int order) {
  if (order < 1) throw ArgumentError("InitGmm: order must be >= 1");
  const std::size_t n = static_cast<std::size_t>(order), t = x.frames();
  if (t < n)
    throw ArgumentError("InitGmm: " + std::to_string(t) + " frames cannot seed " +
                        std::to_string(n) + " components");
  GmmParams g;
  g.weights.assign(n, 1.0 / static_cast<double>(n));
  g.means = Matrix(x.dims(), n);
  g.variances = Matrix(x.dims(), n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    // (2j + 1) T / (2N) in integer arithmetic: floor((j + 0.5) T / N).
    const std::size_t idx = ((2 * j + 1) * t) / (2 * n);
    auto src = x.frame(idx);
    std::copy(src.begin(), src.end(), g.means.col(j).begin());
  }
  return g;
}

double LogComponentDensity(const GmmParams &params, std::size_t i, std::span<const double> x) {
  if (i >= params.order()) throw ArgumentError("LogComponentDensity: component index out of range");
  if (x.size() != params.dims()) throw ArgumentError("LogComponentDensity: dimension mismatch");
  auto mu = params.means.col(i);
  auto var = params.variances.col(i);
  double acc = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - mu[d];
    acc += std::log(var[d]) + diff * diff / var[d];
  }
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + acc);
}

double ComponentDensity(const GmmParams &params, std::size_t i, std::span<const double> x) {
  return std::exp(LogComponentDensity(params, i, x));
}

Vector VarianceFloor(const FeatureMatrix &x, const EmConfig &cfg) {
  Vector floor(x.dims(), cfg.min_variance);
  if (!cfg.variance_floor || x.frames() == 0) return floor;
  const double tt = static_cast<double>(x.frames());
  const Vector var = DataVariance(x);
  for (std::size_t d = 0; d < floor.size(); ++d)
    floor[d] = std::max(var[d] / (tt * tt), cfg.min_variance);
  return floor;
}

double LogLikelihood(const GmmParams &params, const FeatureMatrix &x) {
  CheckDims(params, x, "LogLikelihood");
  const Precomputed pc = Prepare(params);
  Vector lp(params.order());
  CompensatedSum total;
  for (std::size_t t = 0; t < x.frames(); ++t) total.Add(FrameLogProb(params, pc, x.frame(t), lp.data()));
  return total.value();
}

Vector Posteriors(const GmmParams &params, std::span<const double> x) {
  if (x.size() != params.dims()) throw ArgumentError("Posteriors: dimension mismatch");
  const Precomputed pc = Prepare(params);
  Vector lp(params.order());
  FramePosteriors(params, pc, x, lp.data());
  return lp;
}

std::pair<GmmParams, EmTrace> EmFit(const FeatureMatrix &x, const GmmParams &init,
                                    const EmConfig &cfg) {
  cfg.Validate();
  init.Validate();
  CheckDims(init, x, "EmFit");
  if (!x.values.AllFinite()) throw ArgumentError("EmFit: non-finite feature values");
  const std::size_t n = init.order(), m = init.dims(), frames = x.frames();
  if (frames == 0) throw ArgumentError("EmFit: no frames");

  const Vector floor = VarianceFloor(x, cfg);
  Vector data_var = DataVariance(x);
  for (std::size_t d = 0; d < m; ++d) data_var[d] = std::max(data_var[d], floor[d]);

  GmmParams g = init;
  if (cfg.floor_initial)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < m; ++d) g.variances(d, i) = std::max(g.variances(d, i), floor[d]);

  std::mt19937_64 rng(cfg.seed);
  std::vector<double> resp(frames * n);

  auto e_step = [&]() {
    const Precomputed pc = Prepare(g);
    CompensatedSum ll;
    for (std::size_t t = 0; t < frames; ++t) {
      double *r = &resp[t * n];
      ll.Add(FramePosteriors(g, pc, x.frame(t), r));
    }
    return ll.value();
  };

  EmTrace trace;
  double ll = e_step();
  if (!std::isfinite(ll))
    throw NumericError("EmFit: initial model assigns zero likelihood to the data");
  trace.log_likelihoods.push_back(ll);

  Vector mass(n), sum_x(m * n), sum_x2(m * n);
  for (int it = 1; it <= cfg.max_iters; ++it) {
    std::fill(mass.begin(), mass.end(), 0.0);
    std::fill(sum_x.begin(), sum_x.end(), 0.0);
    std::fill(sum_x2.begin(), sum_x2.end(), 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      auto f = x.frame(t);
      const double *r = &resp[t * n];
      for (std::size_t i = 0; i < n; ++i) {
        const double w = r[i];
        if (w == 0.0) continue;
        mass[i] += w;
        double *sx = &sum_x[i * m];
        double *sx2 = &sum_x2[i * m];
        for (std::size_t d = 0; d < m; ++d) {
          const double v = w * f[d];
          sx[d] += v;
          sx2[d] += v * f[d];
        }
      }
    }

    bool reset = false;
    for (std::size_t i = 0; i < n; ++i) {
      auto mu = g.means.col(i);
      auto var = g.variances.col(i);
      if (mass[i] < kCollapseMass) {
        std::uniform_int_distribution<std::size_t> pick(0, frames - 1);
        const std::size_t t = pick(rng);
        auto f = x.frame(t);
        std::copy(f.begin(), f.end(), mu.begin());
        for (std::size_t d = 0; d < m; ++d) var[d] = data_var[d];
        g.weights[i] = 1.0 / static_cast<double>(n);
        trace.events.push_back("iteration " + std::to_string(it) + ": component " +
                               std::to_string(i) + " collapsed; reset to frame " +
                               std::to_string(t));
        reset = true;
        continue;
      }
      g.weights[i] = mass[i] / static_cast<double>(frames);
      const double *sx = &sum_x[i * m];
      const double *sx2 = &sum_x2[i * m];
      for (std::size_t d = 0; d < m; ++d) {
        mu[d] = sx[d] / mass[i];
        var[d] = std::max(sx2[d] / mass[i] - mu[d] * mu[d], floor[d]);
      }
    }
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    if (reset || std::abs(wsum - 1.0) > 1e-12)
      for (double &w : g.weights) w /= wsum;

    const double next = e_step();
    trace.log_likelihoods.push_back(next);
    trace.iterations = it;
    if (!std::isfinite(next))
      throw NumericError("EmFit: log-likelihood became non-finite at iteration " +
                         std::to_string(it));
    if (!reset && next - ll < cfg.ll_epsilon) {
      trace.reason = EmStop::kConverged;
      break;
    }
    ll = next;
  }
  return {std::move(g), std::move(trace)};
}

GmmDecision ClassifyGmm(const std::vector<SpeakerGmm> &models, const FeatureMatrix &x) {
  if (models.empty()) throw ArgumentError("ClassifyGmm: empty model list");
  GmmDecision d;
  d.scores.resize(models.size());
  for (std::size_t s = 0; s < models.size(); ++s) {
    d.scores[s] = LogLikelihood(models[s].params, x);
    if (d.scores[s] > d.scores[d.speaker_index]) d.speaker_index = s;
  }
  d.speaker_id = models[d.speaker_index].speaker_id;
  return d;
}

int JointOptimalDimension(const std::vector<DimensionRate> &rates) {
  if (rates.empty()) throw ArgumentError("JointOptimalDimension: no rates");
  const DimensionRate *best = nullptr;
  double best_cost = 0.0;
  for (const auto &r : rates) {
    if (!(r.rate >= 0.0 && r.rate <= 1.0)) throw ArgumentError("JointOptimalDimension: rate outside [0, 1]");
    const double cost = (1.0 - r.rate) * r.k;
    if (!best || cost < best_cost || (cost == best_cost && r.k < best->k)) {
      best = &r;
      best_cost = cost;
    }
  }
  return best->k;
}

int AccuracyOptimalDimension(const std::vector<DimensionRate> &rates) {
  if (rates.empty()) throw ArgumentError("AccuracyOptimalDimension: no rates");
  const DimensionRate *best = &rates.front();
  for (const auto &r : rates)
    if (r.rate > best->rate || (r.rate == best->rate && r.k < best->k)) best = &r;
  return best->k;
}

void SaveGmm(const SpeakerGmm &model, const std::filesystem::path &path) {
  Matrix w(model.params.order(), 1);
  std::copy(model.params.weights.begin(), model.params.weights.end(), w.data());
  WriteEnvelope(path, Envelope{PayloadKind::kGmm, model.speaker_id,
                               {std::move(w), model.params.means, model.params.variances}});
}

SpeakerGmm LoadGmm(const std::filesystem::path &path) {
  Envelope env = ReadEnvelope(path, PayloadKind::kGmm);
  if (env.blocks.size() != 3 || env.blocks[0].cols() != 1)
    throw FormatError(path.string() + ": GMM needs weight, mean and variance blocks");
  SpeakerGmm model;
  model.speaker_id = env.label;
  model.params.weights.assign(env.blocks[0].values().begin(), env.blocks[0].values().end());
  model.params.means = env.blocks[1];
  model.params.variances = env.blocks[2];
  try {
    model.params.Validate();
  } catch (const ArgumentError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return model;
}

std::string EmTraceCsv(const EmTrace &trace) {
  std::string out = "iteration,log_likelihood\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.log_likelihoods.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, trace.log_likelihoods[i]);
    out += buf;
  }
  return out;
}

}  // namespace spkr
