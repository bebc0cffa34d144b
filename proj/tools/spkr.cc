// spkr/spkr.cc

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

// Command-line front end. Exit codes: 0 success, 1 internal error, 2 bad
// arguments, 3 unreadable or malformed input, 4 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spkr/corpus.h"
#include "spkr/envelope.h"
#include "spkr/errors.h"
#include "spkr/experiment.h"
#include "spkr/wav.h"

namespace fs = std::filesystem;
using namespace spkr;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
};

void AddCommon(CLI::App *cmd, Common *c) {
  cmd->add_option("-c,--config", c->config, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", c->overrides, "override, section.key=value (repeatable)");
}

ExperimentConfig LoadConfig(const Common &c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : ReadConfig(c.config);
  for (const auto &o : c.overrides) ApplyOverride(&cfg, o);
  return cfg;
}

void WriteText(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    WriteFileAtomically(path, text);
}

std::vector<LabeledFeatures> Enrollment(const Corpus &corpus) {
  std::vector<LabeledFeatures> out;
  for (const auto &s : corpus.speakers) out.push_back({s.speaker_id, s.enroll});
  return out;
}

std::vector<LabeledFeatures> Validation(const Corpus &corpus) {
  std::vector<LabeledFeatures> out;
  for (const auto &s : corpus.speakers)
    for (const auto &v : s.validate) out.push_back({s.speaker_id, v});
  return out;
}

std::vector<SpeakerGmm> TrainAll(const std::vector<LabeledFeatures> &data, int order,
                                 const EmConfig &em) {
  std::vector<SpeakerGmm> models;
  for (const auto &d : data)
    models.push_back({d.speaker_id, EmFit(d.features, InitGmm(d.features, order), em).first});
  return models;
}

double GmmRate(const std::vector<SpeakerGmm> &models, const std::vector<LabeledFeatures> &clips,
               const LdaBasis *basis) {
  int ok = 0;
  for (const auto &c : clips) {
    auto d = ClassifyGmm(models, basis ? Project(*basis, c.features) : c.features);
    ok += d.speaker_id == c.speaker_id;
  }
  return static_cast<double>(ok) / clips.size();
}

// Score tables: clip,truth,<speaker>... one row per clip.
struct ScoreTable {
  std::vector<std::string> speakers;
  std::vector<std::string> truth;
  std::vector<Vector> scores;
};

std::string ScoreTableCsv(const ScoreTable &t, const std::vector<std::string> &clips) {
  std::string out = "clip,truth";
  for (const auto &s : t.speakers) out += "," + s;
  out += "\n";
  char buf[40];
  for (std::size_t i = 0; i < t.scores.size(); ++i) {
    out += clips[i] + "," + t.truth[i];
    for (double v : t.scores[i]) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

ScoreTable ReadScoreTable(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  ScoreTable t;
  std::string line, cell;
  if (!std::getline(in, line)) throw FormatError(path + ": empty score table");
  std::istringstream header(line);
  std::getline(header, cell, ',');
  std::getline(header, cell, ',');
  while (std::getline(header, cell, ',')) t.speakers.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    t.truth.push_back(cell);
    Vector v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != t.speakers.size()) throw FormatError(path + ": ragged score row");
    t.scores.push_back(std::move(v));
  }
  return t;
}

std::size_t IndexOf(const std::vector<std::string> &ids, const std::string &id) {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return i;
  throw ArgumentError("speaker '" + id + "' is not in the model set");
}

int Fail(const char *category, const std::exception &e, int code) {
  std::cerr << "spkr: " << category << " error: " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Text-independent closed-set speaker classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LibraryVersion());

  Common common;
  std::string in, out, speaker, dataset, lda_path, trace_out, g1_path, g2_path, kind = "gmm";
  std::vector<std::string> models, inputs;
  int order = 15, k = 0, k_p = 1, k_t = 1, k_max = 0;
  double p = 0.5, p_step = 0.0, ridge = 0.0;
  std::string dims_list = "all", orders_list = "1,2,4,8,16,32", mode = "max-shifted";
  bool csv = false;

  auto *print_config = app.add_subcommand("print-config", "print the effective configuration");
  AddCommon(print_config, &common);

  auto *extract = app.add_subcommand("extract", "16-bit mono WAV -> 39-dim feature file");
  AddCommon(extract, &common);
  extract->add_option("-i,--input", in, "WAV file")->required()->check(CLI::ExistingFile);
  extract->add_option("-o,--output", out, "feature file")->required();
  extract->add_flag("--csv", csv, "write CSV (one frame per line) instead");

  auto *train_pca = app.add_subcommand("train-pca", "train a speaker eigenspace");
  train_pca->add_option("-i,--input", in, "enrollment features")->required();
  train_pca->add_option("--speaker", speaker, "speaker id")->required();
  train_pca->add_option("-o,--output", out, "eigenspace file")->required();

  auto *train_lda = app.add_subcommand("train-lda", "LDA basis from a dataset's enrollment");
  AddCommon(train_lda, &common);
  train_lda->add_option("-d,--dataset", dataset, "dataset directory")->required();
  train_lda->add_option("-k", k, "output dims (0: all)");
  train_lda->add_option("--ridge", ridge, "ridge added to S_W (0: automatic)");
  train_lda->add_option("-o,--output", out, "basis file")->required();

  auto *train_gmm = app.add_subcommand("train-gmm", "train a diagonal GMM by EM");
  AddCommon(train_gmm, &common);
  train_gmm->add_option("-i,--input", in, "enrollment features")->required();
  train_gmm->add_option("--speaker", speaker, "speaker id")->required();
  train_gmm->add_option("-n,--order", order, "mixture order");
  train_gmm->add_option("--lda", lda_path, "project through this basis first");
  train_gmm->add_option("--trace", trace_out, "write the log-likelihood trace CSV");
  train_gmm->add_option("-o,--output", out, "model file")->required();

  auto *search_pca = app.add_subcommand("search-pca", "eigenspace parameter grid search");
  AddCommon(search_pca, &common);
  search_pca->add_option("-d,--dataset", dataset, "dataset directory")->required();
  search_pca->add_option("--k-max", k_max, "largest k_p / k_t (0: automatic)");
  search_pca->add_option("--p-step", p_step, "probability grid step");
  search_pca->add_option("-o,--output", out, "CSV of maximizing points (default stdout)");

  auto *sweep_order = app.add_subcommand("sweep-order", "validation rate against GMM order");
  AddCommon(sweep_order, &common);
  sweep_order->add_option("-d,--dataset", dataset, "dataset directory")->required();
  sweep_order->add_option("--orders", orders_list, "orders, e.g. 1,2,4,8-10");
  sweep_order->add_option("-o,--output", out, "CSV (default stdout)");

  auto *sweep_lda = app.add_subcommand("sweep-lda-dim", "LDA-GMM validation rate against k");
  AddCommon(sweep_lda, &common);
  sweep_lda->add_option("-d,--dataset", dataset, "dataset directory")->required();
  sweep_lda->add_option("--dims", dims_list, "k values or 'all'");
  sweep_lda->add_option("-n,--order", order, "mixture order");
  sweep_lda->add_option("-o,--output", out, "CSV (default stdout)");

  auto *fuse = app.add_subcommand("fuse", "optimize the fusion weight from two score tables");
  fuse->add_option("--g1", g1_path, "eigenspace score table")->required();
  fuse->add_option("--g2", g2_path, "GMM score table")->required();
  fuse->add_option("--p-step", p_step, "weight grid step (default 0.0025)");
  fuse->add_option("--mode", mode, "max-shifted or as-written");
  fuse->add_option("-o,--output", out, "rate curve CSV");

  auto *classify = app.add_subcommand("classify", "score feature files against models");
  classify->add_option("--kind", kind, "pca or gmm");
  classify->add_option("-m,--models", models, "model files")->required();
  classify->add_option("--lda", lda_path, "project through this basis (gmm only)");
  classify->add_option("--k-p", k_p, "principal dims (pca)");
  classify->add_option("--k-t", k_t, "trailing dims (pca)");
  classify->add_option("-p", p, "mixing weight (pca)");
  classify->add_option("-i,--inputs", inputs, "feature files; truth is the parent directory")
      ->required();
  classify->add_option("-o,--output", out, "score table CSV (default stdout)");

  auto *run = app.add_subcommand("run", "full experiment");
  AddCommon(run, &common);
  run->add_option("-o,--output", out, "report directory")->required();

  auto *synth = app.add_subcommand("synth", "write a synthetic feature corpus");
  AddCommon(synth, &common);
  synth->add_option("-o,--output", out, "dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*print_config) {
      std::cout << ConfigToIni(LoadConfig(common));
    } else if (*extract) {
      const auto cfg = LoadConfig(common);
      const FeatureMatrix f = ExtractFeatures(ReadWav(in), cfg.frontend);
      if (csv)
        ExportFeaturesCsv(f, out);
      else
        SaveFeatures(f, out);
      std::cout << f.dims() << " x " << f.frames() << "\n";
    } else if (*train_pca) {
      SaveEigenspace(TrainEigenspace(speaker, LoadFeatures(in)), out);
    } else if (*train_lda) {
      const auto cfg = LoadConfig(common);
      const Corpus corpus = LoadCorpus(dataset);
      const ScatterPair scatter = ScatterMatrices(Enrollment(corpus), cfg.lda_global_mean);
      std::optional<double> r;
      if (ridge > 0.0) r = ridge;
      const LdaBasis basis =
          ComputeLdaBasis(scatter, k > 0 ? k : static_cast<int>(corpus.dims()), r);
      for (const auto &w : basis.warnings) std::cerr << "warning: " << w << "\n";
      SaveLdaBasis(basis, out);
    } else if (*train_gmm) {
      const auto cfg = LoadConfig(common);
      FeatureMatrix x = LoadFeatures(in);
      if (!lda_path.empty()) x = Project(LoadLdaBasis(lda_path), x);
      EmConfig em = cfg.em;
      em.seed = cfg.seed;
      auto [params, trace] = EmFit(x, InitGmm(x, order), em);
      for (const auto &e : trace.events) std::cerr << "em: " << e << "\n";
      SaveGmm({speaker, std::move(params)}, out);
      if (!trace_out.empty()) WriteText(trace_out, EmTraceCsv(trace));
    } else if (*search_pca) {
      const auto cfg = LoadConfig(common);
      const Corpus corpus = LoadCorpus(dataset);
      std::vector<SpeakerEigenspace> eig;
      for (const auto &s : corpus.speakers) eig.push_back(TrainEigenspace(s.speaker_id, s.enroll));
      GridSearchOptions opt;
      opt.k_max = k_max > 0 ? k_max : cfg.pca_k_max;
      opt.p_step = p_step > 0.0 ? p_step : cfg.pca_p_step;
      opt.threads = cfg.threads;
      const GridSearchResult res = GridSearch(eig, Validation(corpus), opt);
      const PcaParams best = res.Best();
      std::cerr << "best rate " << res.best_rate << " at k_p=" << best.k_p << " k_t=" << best.k_t
                << " p=" << best.p << "\n";
      WriteText(out, GridSearchCsv(res));
    } else if (*sweep_order) {
      const auto cfg = LoadConfig(common);
      const Corpus corpus = LoadCorpus(dataset);
      std::string csv_out = "order,validation_rate\n";
      for (int n : ParseIndexList(orders_list)) {
        const double rate = GmmRate(TrainAll(Enrollment(corpus), n, cfg.em), Validation(corpus),
                                    nullptr);
        csv_out += std::to_string(n) + "," + std::to_string(rate) + "\n";
      }
      WriteText(out, csv_out);
    } else if (*sweep_lda) {
      const auto cfg = LoadConfig(common);
      const Corpus corpus = LoadCorpus(dataset);
      const auto enroll = Enrollment(corpus);
      const ScatterPair scatter = ScatterMatrices(enroll, cfg.lda_global_mean);
      std::optional<double> r;
      if (cfg.lda_ridge > 0.0) r = cfg.lda_ridge;
      const LdaBasis full = ComputeLdaBasis(scatter, static_cast<int>(corpus.dims()), r);
      std::vector<int> ks = dims_list == "all" ? std::vector<int>{} : ParseIndexList(dims_list);
      if (ks.empty())
        for (int i = 1; i <= static_cast<int>(corpus.dims()); ++i) ks.push_back(i);
      std::vector<DimensionRate> rates;
      for (int kk : ks) {
        const LdaBasis b = Truncate(full, kk);
        std::vector<LabeledFeatures> projected;
        for (const auto &e : enroll) projected.push_back({e.speaker_id, Project(b, e.features)});
        rates.push_back({kk, GmmRate(TrainAll(projected, order, cfg.em), Validation(corpus), &b)});
      }
      PopulationReport pop;
      pop.lda_sweep = rates;
      std::cerr << "k* = " << JointOptimalDimension(rates)
                << ", accuracy-optimal k = " << AccuracyOptimalDimension(rates) << "\n";
      WriteText(out, LdaSweepCsv(pop));
    } else if (*fuse) {
      FusionMode fm;
      if (mode == "max-shifted")
        fm = FusionMode::kMaxShifted;
      else if (mode == "as-written")
        fm = FusionMode::kAsWritten;
      else
        throw ArgumentError("--mode must be max-shifted or as-written");
      const ScoreTable a = ReadScoreTable(g1_path), b = ReadScoreTable(g2_path);
      if (a.speakers != b.speakers || a.truth != b.truth)
        throw ArgumentError("score tables disagree on speakers or clips");
      std::vector<std::size_t> labels;
      for (const auto &t : a.truth) labels.push_back(IndexOf(a.speakers, t));
      const FusionWeights w =
          OptimizeWeight(a.scores, b.scores, labels, p_step > 0.0 ? p_step : 0.0025, fm);
      std::cout << "p* = " << w.p_star << " range [" << w.p_lo << ", " << w.p_hi
                << "] validation rate " << w.rate << "\n";
      if (!out.empty()) WriteText(out, FusionCurveCsv(w));
    } else if (*classify) {
      ScoreTable table;
      std::vector<std::string> clips;
      std::vector<SpeakerEigenspace> eig;
      std::vector<SpeakerGmm> gmms;
      if (kind == "pca") {
        for (const auto &m : models) eig.push_back(LoadEigenspace(m));
        for (const auto &m : eig) table.speakers.push_back(m.speaker_id);
      } else if (kind == "gmm") {
        for (const auto &m : models) gmms.push_back(LoadGmm(m));
        for (const auto &m : gmms) table.speakers.push_back(m.speaker_id);
      } else {
        throw ArgumentError("--kind must be pca or gmm");
      }
      std::optional<LdaBasis> basis;
      if (!lda_path.empty()) basis = LoadLdaBasis(lda_path);
      int ok = 0;
      for (const auto &path : inputs) {
        FeatureMatrix x = LoadFeatures(path);
        std::size_t decided;
        if (kind == "pca") {
          Decision d = ClassifyMixed(eig, x, PcaParams{k_p, k_t, p});
          decided = d.speaker_index;
          table.scores.push_back(std::move(d.scores));
        } else {
          if (basis) x = Project(*basis, x);
          GmmDecision d = ClassifyGmm(gmms, x);
          decided = d.speaker_index;
          table.scores.push_back(std::move(d.scores));
        }
        const std::string truth = fs::path(path).parent_path().filename().string();
        table.truth.push_back(truth);
        clips.push_back(path);
        ok += table.speakers[decided] == truth;
      }
      std::cerr << ok << " of " << inputs.size() << " clips match their directory name\n";
      WriteText(out, ScoreTableCsv(table, clips));
    } else if (*run) {
      const auto cfg = LoadConfig(common);
      const ExperimentReport report = RunExperiment(cfg, fs::path(out));
      WriteReport(report, out);
      std::cout << SummaryText(report);
    } else if (*synth) {
      const auto cfg = LoadConfig(common);
      SaveCorpus(SynthCorpus(cfg.synth), out);
    }
  } catch (const ArgumentError &e) {
    return Fail("argument", e, 2);
  } catch (const FormatError &e) {
    return Fail("format", e, 3);
  } catch (const NumericError &e) {
    return Fail("numeric", e, 4);
  } catch (const std::exception &e) {
    return Fail("internal", e, 1);
  }
  return 0;
}
