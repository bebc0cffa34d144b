// spkr/experiment.h

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

#ifndef SPKR_EXPERIMENT_H_
#define SPKR_EXPERIMENT_H_

// End-to-end experiment: corpus -> split -> train -> validate -> test ->
// report. Configuration is an INI file whose every key has a default;
// ConfigToIni(ExperimentConfig{}) prints the full set.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spkr/corpus.h"
#include "spkr/fusion.h"
#include "spkr/gmm.h"
#include "spkr/lda.h"
#include "spkr/pca.h"

namespace spkr {

enum class CorpusSource { kSynthetic, kManifest, kDataset };

struct ExperimentConfig {
  // [corpus]
  CorpusSource source = CorpusSource::kSynthetic;
  std::filesystem::path manifest;  // kManifest: "speaker_id path" lines
  std::filesystem::path dataset;   // kDataset: directory written by SaveCorpus
  std::vector<int> populations;    // empty: every speaker once
  // [split] and [frontend] apply to manifest corpora only.
  SplitSpec split;
  FrontendConfig frontend;
  // [synth]
  SynthSpec synth;
  // [pca]
  bool pca = true;
  int pca_k_max = 0;
  double pca_p_step = 0.01;
  bool pca_dim_sweep = true;
  // [gmm]
  int gmm_order = 15;
  EmConfig em;
  bool gmm_baseline = true;          // full-dimensional GMM at gmm_order
  std::vector<int> order_sweep{1, 2, 4, 8, 16, 32};
  // [lda]
  bool lda = true;
  std::vector<int> lda_dims;         // empty: 1..M
  double lda_ridge = 0.0;            // <= 0: 1e-6 * trace(S_W) / M
  GlobalMeanRule lda_global_mean = GlobalMeanRule::kMeanOfClassMeans;
  // [fusion]
  bool fusion = true;
  double fusion_p_step = 0.0025;
  FusionMode fusion_mode = FusionMode::kMaxShifted;
  // [run]
  std::uint64_t seed = 1;            // EM collapse re-seeding
  unsigned threads = 0;

  // ArgumentError for inconsistent settings (fusion without both
  // classifiers, non-positive steps, empty populations, ...).
  void Validate() const;
};

std::string ConfigToIni(const ExperimentConfig &cfg);
// Starts from defaults; unknown sections or keys are an ArgumentError.
ExperimentConfig ParseConfigIni(const std::string &text);
ExperimentConfig ReadConfig(const std::filesystem::path &path);
// "section.key=value".
void ApplyOverride(ExperimentConfig *cfg, const std::string &assignment);

struct ClassifierRates {
  double validation = 0.0;
  double test = 0.0;
};

struct OrderRate {
  int order = 0;
  ClassifierRates rates;
};

struct ClipDecision {
  std::string clip;       // "<speaker>/test_NN"
  std::string truth;
  std::string pca;        // empty when the stage is disabled
  std::string lda_gmm;
  std::string combined;
};

struct PopulationReport {
  int speakers = 0;
  std::size_t validate_clips = 0;
  std::size_t test_clips = 0;
  std::size_t dims = 0;

  std::optional<GridSearchResult> pca_grid;
  PcaParams pca_params;
  std::optional<DimensionSweepResult> pca_dim_sweep;
  std::optional<ClassifierRates> pca;

  std::optional<ClassifierRates> gmm_full;
  std::vector<OrderRate> order_sweep;

  std::vector<DimensionRate> lda_sweep;  // validation rate per k
  int lda_k_star = 0;                    // min (1 - rate) * k
  int lda_k_accuracy = 0;                // max rate
  std::optional<ClassifierRates> lda_gmm;
  std::vector<std::string> warnings;

  std::optional<FusionWeights> fusion_weights;
  std::optional<ClassifierRates> combined;

  std::vector<ClipDecision> decisions;
  std::vector<std::string> em_events;
};

struct StageTiming {
  int speakers = 0;
  std::string stage;
  double seconds = 0.0;
};

struct ExperimentReport {
  std::string version;
  std::string config;  // ConfigToIni of the effective configuration
  std::vector<PopulationReport> populations;
  std::vector<StageTiming> timings;
};

std::string LibraryVersion();

// Loads or generates the configured corpus.
Corpus LoadExperimentCorpus(const ExperimentConfig &cfg);

/// Runs every enabled stage for each population (the first S speakers of
/// the corpus). Failures are rethrown with the stage name and, where one is
/// involved, the speaker id. When out_dir is set, each stage's table is
/// written there as soon as the stage finishes.
ExperimentReport RunExperiment(const ExperimentConfig &cfg, const Corpus &corpus,
                               const std::optional<std::filesystem::path> &out_dir = {});
ExperimentReport RunExperiment(const ExperimentConfig &cfg,
                               const std::optional<std::filesystem::path> &out_dir = {});

// Human-readable summary without timings; byte-identical across reruns.
std::string SummaryText(const ExperimentReport &report);
std::string TimingCsv(const ExperimentReport &report);
std::string DecisionsCsv(const ExperimentReport &report);
std::string OrderSweepCsv(const PopulationReport &pop);
std::string LdaSweepCsv(const PopulationReport &pop);

// summary.txt, config.ini, decisions.csv, timing.csv and the per-population
// tables pca_grid_S<n>.csv, dim_sweep_S<n>.csv, order_sweep_S<n>.csv,
// lda_sweep_S<n>.csv and fusion_S<n>.csv.
void WriteReport(const ExperimentReport &report, const std::filesystem::path &dir);

}  // namespace spkr

#endif  // SPKR_EXPERIMENT_H_
