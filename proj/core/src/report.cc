// spkr/report.cc

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

#include <cstdarg>
#include <cstdio>

#include "spkr/envelope.h"
#include "spkr/experiment.h"

namespace spkr {

namespace fs = std::filesystem;

namespace {

void Appendf(std::string *out, const char *fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  *out += buf;
}

void RateLine(std::string *out, const std::string &name, const std::optional<ClassifierRates> &r) {
  if (r) Appendf(out, "  %-28s %10.6f %10.6f\n", name.c_str(), r->validation, r->test);
}

// Stage seconds for one population, 0 when absent.
double Seconds(const ExperimentReport &report, int speakers, const std::string &stage) {
  double s = 0.0;
  for (const auto &t : report.timings)
    if (t.speakers == speakers && t.stage == stage) s += t.seconds;
  return s;
}

}  // namespace

std::string SummaryText(const ExperimentReport &report) {
  std::string out;
  Appendf(&out, "spkr experiment report\nlibrary version %s\n", report.version.c_str());
  for (const auto &pop : report.populations) {
    Appendf(&out, "\n== population S=%d: %zu validation clips, %zu test clips, %zu dims ==\n",
            pop.speakers, pop.validate_clips, pop.test_clips, pop.dims);
    Appendf(&out, "  %-28s %10s %10s\n", "classifier", "validation", "test");
    RateLine(&out, "pca-mixed", pop.pca);
    if (pop.gmm_full) RateLine(&out, "gmm (full dims)", pop.gmm_full);
    if (pop.lda_gmm) RateLine(&out, "lda-gmm (k=" + std::to_string(pop.lda_k_star) + ")",
                              pop.lda_gmm);
    RateLine(&out, "combined", pop.combined);
    if (pop.pca_grid) {
      Appendf(&out, "  pca: k_p=%d k_t=%d p=%.4f; %zu maximizing points at rate %.6f, k_max=%d\n",
              pop.pca_params.k_p, pop.pca_params.k_t, pop.pca_params.p, pop.pca_grid->points.size(),
              pop.pca_grid->best_rate, pop.pca_grid->k_max);
    }
    if (pop.lda_gmm)
      Appendf(&out, "  lda: joint-optimal k*=%d, accuracy-optimal k=%d over %zu dims\n",
              pop.lda_k_star, pop.lda_k_accuracy, pop.lda_sweep.size());
    if (pop.fusion_weights)
      Appendf(&out, "  fusion: p*=%.4f, maximizing range [%.4f, %.4f]\n", pop.fusion_weights->p_star,
              pop.fusion_weights->p_lo, pop.fusion_weights->p_hi);
    if (!pop.order_sweep.empty()) {
      Appendf(&out, "  order sweep (validation/test):");
      for (const auto &o : pop.order_sweep)
        Appendf(&out, " N=%d %.4f/%.4f", o.order, o.rates.validation, o.rates.test);
      out += "\n";
    }
    for (const auto &w : pop.warnings) Appendf(&out, "  warning: %s\n", w.c_str());
    for (const auto &e : pop.em_events) Appendf(&out, "  em: %s\n", e.c_str());
  }
  out += "\n== configuration ==\n" + report.config;
  return out;
}

std::string TimingCsv(const ExperimentReport &report) {
  std::string out = "speakers,stage,seconds\n";
  for (const auto &t : report.timings)
    Appendf(&out, "%d,%s,%.6f\n", t.speakers, t.stage.c_str(), t.seconds);
  return out;
}

std::string DecisionsCsv(const ExperimentReport &report) {
  std::string out = "speakers,clip,truth,pca,lda_gmm,combined\n";
  for (const auto &pop : report.populations)
    for (const auto &d : pop.decisions)
      Appendf(&out, "%d,%s,%s,%s,%s,%s\n", pop.speakers, d.clip.c_str(), d.truth.c_str(),
              d.pca.c_str(), d.lda_gmm.c_str(), d.combined.c_str());
  return out;
}

std::string OrderSweepCsv(const PopulationReport &pop) {
  std::string out = "order,validation_rate,test_rate\n";
  for (const auto &o : pop.order_sweep)
    Appendf(&out, "%d,%.6f,%.6f\n", o.order, o.rates.validation, o.rates.test);
  return out;
}

std::string LdaSweepCsv(const PopulationReport &pop) {
  std::string out = "k,validation_rate,joint_cost\n";
  for (const auto &r : pop.lda_sweep)
    Appendf(&out, "%d,%.6f,%.6f\n", r.k, r.rate, (1.0 - r.rate) * r.k);
  return out;
}

void WriteReport(const ExperimentReport &report, const fs::path &dir) {
  fs::create_directories(dir);
  WriteFileAtomically(dir / "summary.txt", SummaryText(report));
  WriteFileAtomically(dir / "config.ini", report.config);
  WriteFileAtomically(dir / "decisions.csv", DecisionsCsv(report));
  WriteFileAtomically(dir / "timing.csv", TimingCsv(report));

  std::string cost;
  for (const auto &pop : report.populations) {
    const std::string tag = "_S" + std::to_string(pop.speakers) + ".csv";
    if (pop.pca_grid) WriteFileAtomically(dir / ("pca_grid" + tag), GridSearchCsv(*pop.pca_grid));
    if (pop.pca_dim_sweep)
      WriteFileAtomically(dir / ("dim_sweep" + tag), DimensionSweepCsv(*pop.pca_dim_sweep));
    if (!pop.order_sweep.empty())
      WriteFileAtomically(dir / ("order_sweep" + tag), OrderSweepCsv(pop));
    if (!pop.lda_sweep.empty()) WriteFileAtomically(dir / ("lda_sweep" + tag), LdaSweepCsv(pop));
    if (pop.fusion_weights)
      WriteFileAtomically(dir / ("fusion" + tag), FusionCurveCsv(*pop.fusion_weights));

    const double full_train = Seconds(report, pop.speakers, "gmm-train");
    const double full_test = Seconds(report, pop.speakers, "gmm-test");
    const double lda_train = Seconds(report, pop.speakers, "lda-gmm-train");
    const double lda_test = Seconds(report, pop.speakers, "lda-gmm-test");
    if (full_train > 0.0 && lda_train > 0.0)
      Appendf(&cost,
              "S=%d: lda-gmm training took %.1f%% less wall time than full-dim gmm training, "
              "testing %.1f%% less\n",
              pop.speakers, 100.0 * (1.0 - lda_train / full_train),
              full_test > 0.0 ? 100.0 * (1.0 - lda_test / full_test) : 0.0);
  }
  if (!cost.empty()) WriteFileAtomically(dir / "timing.txt", cost);
}

}  // namespace spkr
