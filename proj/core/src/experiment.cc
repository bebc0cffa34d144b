// spkr/experiment.cc

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

#include "spkr/experiment.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "spkr/errors.h"
#include "spkr/parallel.h"

namespace spkr {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

std::string LibraryVersion() { return SPKR_VERSION; }

// ---------------------------------------------------------------------------
// Config fields. Each field knows how to print and parse itself, so the INI
// writer, reader and command-line overrides share one table.

namespace {

std::string Format(int v) { return std::to_string(v); }
std::string Format(unsigned v) { return std::to_string(v); }
std::string Format(std::uint64_t v) { return std::to_string(v); }
std::string Format(bool v) { return v ? "true" : "false"; }
std::string Format(const fs::path &v) { return v.string(); }
std::string Format(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
std::string Format(CorpusSource v) {
  switch (v) {
    case CorpusSource::kSynthetic: return "synthetic";
    case CorpusSource::kManifest: return "manifest";
    case CorpusSource::kDataset: return "dataset";
  }
  return "?";
}
std::string Format(GlobalMeanRule v) {
  return v == GlobalMeanRule::kMeanOfClassMeans ? "class-means" : "frame-weighted";
}
std::string Format(FusionMode v) {
  return v == FusionMode::kMaxShifted ? "max-shifted" : "as-written";
}

template <typename T>
T ParseNumber(const std::string &text) {
  T v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ArgumentError("'" + text + "' is not a valid number");
  return v;
}

void ParseInto(const std::string &t, int *v) { *v = ParseNumber<int>(t); }
void ParseInto(const std::string &t, unsigned *v) { *v = ParseNumber<unsigned>(t); }
void ParseInto(const std::string &t, std::uint64_t *v) { *v = ParseNumber<std::uint64_t>(t); }
void ParseInto(const std::string &t, double *v) { *v = ParseNumber<double>(t); }
void ParseInto(const std::string &t, fs::path *v) { *v = t; }
void ParseInto(const std::string &t, bool *v) {
  if (t == "true" || t == "1" || t == "yes") *v = true;
  else if (t == "false" || t == "0" || t == "no") *v = false;
  else throw ArgumentError("'" + t + "' is not a boolean");
}
void ParseInto(const std::string &t, CorpusSource *v) {
  if (t == "synthetic") *v = CorpusSource::kSynthetic;
  else if (t == "manifest") *v = CorpusSource::kManifest;
  else if (t == "dataset") *v = CorpusSource::kDataset;
  else throw ArgumentError("corpus source must be synthetic, manifest or dataset");
}
void ParseInto(const std::string &t, GlobalMeanRule *v) {
  if (t == "class-means") *v = GlobalMeanRule::kMeanOfClassMeans;
  else if (t == "frame-weighted") *v = GlobalMeanRule::kFrameWeighted;
  else throw ArgumentError("global mean must be class-means or frame-weighted");
}
void ParseInto(const std::string &t, FusionMode *v) {
  if (t == "max-shifted") *v = FusionMode::kMaxShifted;
  else if (t == "as-written") *v = FusionMode::kAsWritten;
  else throw ArgumentError("fusion mode must be max-shifted or as-written");
}

// Index lists whose empty value is spelled out ("all" or "none").
std::vector<int> ParseList(const std::string &t, const char *empty) {
  return t == empty ? std::vector<int>{} : ParseIndexList(t);
}

struct Field {
  std::string section, key;
  std::function<std::string(const ExperimentConfig &)> get;
  std::function<void(ExperimentConfig &, const std::string &)> set;
};

template <typename Acc>
Field Scalar(const char *section, const char *key, Acc acc) {
  return {section, key,
          [acc](const ExperimentConfig &c) { return Format(acc(const_cast<ExperimentConfig &>(c))); },
          [acc](ExperimentConfig &c, const std::string &t) { ParseInto(t, &acc(c)); }};
}

template <typename Acc>
Field List(const char *section, const char *key, Acc acc, const char *empty = "all") {
  return {section, key,
          [acc, empty](const ExperimentConfig &c) {
            const auto &v = acc(const_cast<ExperimentConfig &>(c));
            return v.empty() ? std::string(empty) : FormatIndexList(v);
          },
          [acc, empty](ExperimentConfig &c, const std::string &t) {
            acc(c) = ParseList(t, empty);
          }};
}

#define SPKR_ACC(expr) [](ExperimentConfig &c) -> auto & { return c.expr; }

const std::vector<Field> &Fields() {
  static const std::vector<Field> fields = {
      Scalar("corpus", "source", SPKR_ACC(source)),
      Scalar("corpus", "manifest", SPKR_ACC(manifest)),
      Scalar("corpus", "dataset", SPKR_ACC(dataset)),
      List("corpus", "populations", SPKR_ACC(populations)),
      List("split", "enroll", SPKR_ACC(split.enroll.utterances), "none"),
      Scalar("split", "enroll_seconds", SPKR_ACC(split.enroll.seconds)),
      List("split", "validate", SPKR_ACC(split.validate.utterances), "none"),
      Scalar("split", "validate_seconds", SPKR_ACC(split.validate.seconds)),
      List("split", "test", SPKR_ACC(split.test.utterances), "none"),
      Scalar("split", "test_seconds", SPKR_ACC(split.test.seconds)),
      Scalar("frontend", "window_ms", SPKR_ACC(frontend.window_ms)),
      Scalar("frontend", "hop_ms", SPKR_ACC(frontend.hop_ms)),
      Scalar("frontend", "num_mel_filters", SPKR_ACC(frontend.num_mel_filters)),
      Scalar("frontend", "num_ceps", SPKR_ACC(frontend.num_ceps)),
      Scalar("frontend", "pre_emphasis", SPKR_ACC(frontend.pre_emphasis)),
      Scalar("frontend", "delta_window", SPKR_ACC(frontend.delta_window)),
      Scalar("frontend", "include_energy", SPKR_ACC(frontend.include_energy)),
      Scalar("frontend", "low_freq_hz", SPKR_ACC(frontend.low_freq_hz)),
      Scalar("frontend", "high_freq_hz", SPKR_ACC(frontend.high_freq_hz)),
      Scalar("synth", "seed", SPKR_ACC(synth.seed)),
      Scalar("synth", "speakers", SPKR_ACC(synth.speakers)),
      Scalar("synth", "gen_order", SPKR_ACC(synth.gen_order)),
      Scalar("synth", "separation", SPKR_ACC(synth.separation)),
      Scalar("synth", "dims", SPKR_ACC(synth.dims)),
      Scalar("synth", "enroll_frames", SPKR_ACC(synth.enroll_frames)),
      Scalar("synth", "clip_frames", SPKR_ACC(synth.clip_frames)),
      Scalar("synth", "validate_clips", SPKR_ACC(synth.validate_clips)),
      Scalar("synth", "test_clips", SPKR_ACC(synth.test_clips)),
      Scalar("pca", "enabled", SPKR_ACC(pca)),
      Scalar("pca", "k_max", SPKR_ACC(pca_k_max)),
      Scalar("pca", "p_step", SPKR_ACC(pca_p_step)),
      Scalar("pca", "dim_sweep", SPKR_ACC(pca_dim_sweep)),
      Scalar("gmm", "order", SPKR_ACC(gmm_order)),
      Scalar("gmm", "max_iters", SPKR_ACC(em.max_iters)),
      Scalar("gmm", "ll_epsilon", SPKR_ACC(em.ll_epsilon)),
      Scalar("gmm", "variance_floor", SPKR_ACC(em.variance_floor)),
      Scalar("gmm", "floor_initial", SPKR_ACC(em.floor_initial)),
      Scalar("gmm", "min_variance", SPKR_ACC(em.min_variance)),
      Scalar("gmm", "baseline", SPKR_ACC(gmm_baseline)),
      List("gmm", "order_sweep", SPKR_ACC(order_sweep), "none"),
      Scalar("lda", "enabled", SPKR_ACC(lda)),
      List("lda", "dims", SPKR_ACC(lda_dims)),
      Scalar("lda", "ridge", SPKR_ACC(lda_ridge)),
      Scalar("lda", "global_mean", SPKR_ACC(lda_global_mean)),
      Scalar("fusion", "enabled", SPKR_ACC(fusion)),
      Scalar("fusion", "p_step", SPKR_ACC(fusion_p_step)),
      Scalar("fusion", "mode", SPKR_ACC(fusion_mode)),
      Scalar("run", "seed", SPKR_ACC(seed)),
      Scalar("run", "threads", SPKR_ACC(threads)),
  };
  return fields;
}

#undef SPKR_ACC

const Field &FindField(const std::string &section, const std::string &key) {
  for (const auto &f : Fields())
    if (f.section == section && f.key == key) return f;
  throw ArgumentError("unknown config key '" + section + "." + key + "'");
}

void SetField(ExperimentConfig *cfg, const std::string &section, const std::string &key,
              const std::string &value) {
  try {
    FindField(section, key).set(*cfg, value);
  } catch (const ArgumentError &e) {
    if (std::string(e.what()).rfind("unknown config key", 0) == 0) throw;
    throw ArgumentError(section + "." + key + ": " + e.what());
  }
}

}  // namespace

void ExperimentConfig::Validate() const {
  for (int s : populations)
    if (s < 2) throw ArgumentError("config: populations must be >= 2 speakers");
  if (source == CorpusSource::kSynthetic) synth.Validate();
  if (source == CorpusSource::kManifest) {
    split.Validate();
    frontend.Validate();
    if (manifest.empty()) throw ArgumentError("config: corpus.manifest is empty");
  }
  if (source == CorpusSource::kDataset && dataset.empty())
    throw ArgumentError("config: corpus.dataset is empty");
  if (!(pca_p_step > 0.0 && pca_p_step <= 1.0))
    throw ArgumentError("config: pca.p_step must lie in (0, 1]");
  if (pca_k_max < 0) throw ArgumentError("config: pca.k_max must be >= 0");
  if (gmm_order < 1) throw ArgumentError("config: gmm.order must be >= 1");
  em.Validate();
  for (int n : order_sweep)
    if (n < 1) throw ArgumentError("config: gmm.order_sweep entries must be >= 1");
  for (int k : lda_dims)
    if (k < 1) throw ArgumentError("config: lda.dims entries must be >= 1");
  if (!(fusion_p_step > 0.0 && fusion_p_step <= 1.0))
    throw ArgumentError("config: fusion.p_step must lie in (0, 1]");
  if (fusion && !(pca && lda))
    throw ArgumentError("config: fusion needs both pca.enabled and lda.enabled");
}

std::string ConfigToIni(const ExperimentConfig &cfg) {
  pt::ptree tree;
  for (const auto &f : Fields()) {
    pt::ptree *sec = nullptr;
    if (auto found = tree.get_child_optional(f.section))
      sec = &*found;
    else
      sec = &tree.push_back({f.section, pt::ptree()})->second;
    sec->push_back({f.key, pt::ptree(f.get(cfg))});
  }
  std::ostringstream out;
  pt::write_ini(out, tree);
  return out.str();
}

ExperimentConfig ParseConfigIni(const std::string &text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto &[section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ArgumentError("config: key '" + section + "' outside any section");
    for (const auto &[key, value] : body) SetField(&cfg, section, key, value.data());
  }
  return cfg;
}

ExperimentConfig ReadConfig(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfigIni(ss.str());
}

void ApplyOverride(ExperimentConfig *cfg, const std::string &assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ArgumentError("override '" + assignment + "' is not section.key=value");
  SetField(cfg, assignment.substr(0, dot), assignment.substr(dot + 1, eq - dot - 1),
           assignment.substr(eq + 1));
}

// ---------------------------------------------------------------------------
// Pipeline.

Corpus LoadExperimentCorpus(const ExperimentConfig &cfg) {
  switch (cfg.source) {
    case CorpusSource::kSynthetic: return SynthCorpus(cfg.synth);
    case CorpusSource::kDataset: return LoadCorpus(cfg.dataset);
    case CorpusSource::kManifest:
      return SplitCorpus(ReadManifest(cfg.manifest), cfg.split, cfg.frontend, cfg.threads);
  }
  throw ArgumentError("unknown corpus source");
}

namespace {

// Rethrows the in-flight exception with `prefix` prepended, keeping its
// category.
[[noreturn]] void RethrowWith(const std::string &prefix) {
  try {
    throw;
  } catch (const ArgumentError &e) {
    throw ArgumentError(prefix + e.what());
  } catch (const NumericError &e) {
    throw NumericError(prefix + e.what());
  } catch (const FormatError &e) {
    throw FormatError(prefix + e.what());
  } catch (const std::exception &e) {
    throw std::runtime_error(prefix + e.what());
  }
}

struct Clip {
  std::size_t speaker;
  std::string name;
  const FeatureMatrix *features;
};

std::vector<Clip> Clips(const Corpus &corpus, bool test) {
  std::vector<Clip> out;
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    const auto &spk = corpus.speakers[s];
    const auto &clips = test ? spk.test : spk.validate;
    for (std::size_t i = 0; i < clips.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "/%s_%02zu", test ? "test" : "validate", i + 1);
      out.push_back({s, spk.speaker_id + buf, &clips[i]});
    }
  }
  return out;
}

double Rate(const std::vector<std::size_t> &decisions, const std::vector<Clip> &clips) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) ok += decisions[i] == clips[i].speaker;
  return static_cast<double>(ok) / static_cast<double>(clips.size());
}

class Runner {
 public:
  Runner(const ExperimentConfig &cfg, const Corpus &corpus, ExperimentReport *report,
         std::function<void()> checkpoint)
      : cfg_(cfg), corpus_(corpus), report_(report), checkpoint_(std::move(checkpoint)),
        threads_(ResolveThreads(cfg.threads)), val_(Clips(corpus, false)),
        test_(Clips(corpus, true)) {
    for (const auto &c : val_) val_labels_.push_back(c.speaker);
  }

  void Run(PopulationReport *pop) {
    pop_ = pop;
    pop->speakers = static_cast<int>(corpus_.speakers.size());
    pop->validate_clips = val_.size();
    pop->test_clips = test_.size();
    pop->dims = corpus_.dims();
    if (cfg_.pca) RunPca();
    if (cfg_.gmm_baseline) RunGmmBaseline();
    if (!cfg_.order_sweep.empty()) RunOrderSweep();
    if (cfg_.lda) RunLda();
    if (cfg_.fusion) RunFusion();
    RecordDecisions();
  }

 private:
  template <typename Fn>
  void Stage(const std::string &name, Fn &&fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (...) {
      RethrowWith("stage '" + name + "' (S=" + std::to_string(pop_->speakers) + "): ");
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    report_->timings.push_back({pop_->speakers, name, dt.count()});
    checkpoint_();
  }

  // fn(i) for every speaker, with failures tagged by speaker id.
  template <typename Fn>
  void PerSpeaker(Fn &&fn) {
    ParallelFor(corpus_.speakers.size(), threads_, [&](std::size_t i) {
      try {
        fn(i);
      } catch (...) {
        RethrowWith("speaker '" + corpus_.speakers[i].speaker_id + "': ");
      }
    });
  }

  std::vector<SpeakerGmm> TrainGmms(const std::vector<FeatureMatrix> &data, int order) {
    std::vector<SpeakerGmm> models(data.size());
    std::vector<std::vector<std::string>> events(data.size());
    PerSpeaker([&](std::size_t i) {
      EmConfig em = cfg_.em;
      em.seed = cfg_.seed * 0x9E3779B97F4A7C15ull + i;
      auto [params, trace] = EmFit(data[i], InitGmm(data[i], order), em);
      models[i] = {corpus_.speakers[i].speaker_id, std::move(params)};
      events[i] = std::move(trace.events);
    });
    for (std::size_t i = 0; i < data.size(); ++i)
      for (const auto &e : events[i])
        pop_->em_events.push_back("N=" + std::to_string(order) + " " +
                                  corpus_.speakers[i].speaker_id + ": " + e);
    return models;
  }

  // Classifies clips, optionally through a projection.
  std::vector<GmmDecision> ClassifyClips(const std::vector<SpeakerGmm> &models,
                                         const std::vector<Clip> &clips,
                                         const LdaBasis *basis = nullptr) {
    std::vector<GmmDecision> out(clips.size());
    ParallelFor(clips.size(), threads_, [&](std::size_t i) {
      out[i] = basis ? ClassifyGmm(models, Project(*basis, *clips[i].features))
                     : ClassifyGmm(models, *clips[i].features);
    });
    return out;
  }

  static std::vector<std::size_t> Indices(const std::vector<GmmDecision> &d) {
    std::vector<std::size_t> out;
    for (const auto &x : d) out.push_back(x.speaker_index);
    return out;
  }

  std::vector<FeatureMatrix> Enrollment() const {
    std::vector<FeatureMatrix> out;
    for (const auto &s : corpus_.speakers) out.push_back(s.enroll);
    return out;
  }

  void RunPca() {
    std::vector<SpeakerEigenspace> models(corpus_.speakers.size());
    Stage("pca-train", [&] {
      PerSpeaker([&](std::size_t i) {
        models[i] = TrainEigenspace(corpus_.speakers[i].speaker_id, corpus_.speakers[i].enroll);
      });
    });
    std::vector<LabeledFeatures> val;
    for (const auto &c : val_) val.push_back({corpus_.speakers[c.speaker].speaker_id, *c.features});
    Stage("pca-search", [&] {
      GridSearchOptions opt;
      opt.k_max = cfg_.pca_k_max;
      opt.p_step = cfg_.pca_p_step;
      opt.threads = threads_;
      pop_->pca_grid = GridSearch(models, val, opt);
      pop_->pca_params = pop_->pca_grid->Best();
    });
    if (cfg_.pca_dim_sweep)
      Stage("pca-dim-sweep", [&] { pop_->pca_dim_sweep = DimensionSweep(models, val, threads_); });
    Stage("pca-test", [&] {
      auto run = [&](const std::vector<Clip> &clips, std::vector<Vector> *scores) {
        std::vector<std::size_t> dec(clips.size());
        scores->resize(clips.size());
        ParallelFor(clips.size(), threads_, [&](std::size_t i) {
          Decision d = ClassifyMixed(models, *clips[i].features, pop_->pca_params);
          dec[i] = d.speaker_index;
          (*scores)[i] = std::move(d.scores);
        });
        return dec;
      };
      pca_val_ = run(val_, &g1_val_);
      pca_test_ = run(test_, &g1_test_);
      pop_->pca = ClassifierRates{Rate(pca_val_, val_), Rate(pca_test_, test_)};
    });
  }

  void RunGmmBaseline() {
    std::vector<SpeakerGmm> models;
    Stage("gmm-train", [&] { models = TrainGmms(Enrollment(), cfg_.gmm_order); });
    Stage("gmm-test", [&] {
      pop_->gmm_full = ClassifierRates{Rate(Indices(ClassifyClips(models, val_)), val_),
                                       Rate(Indices(ClassifyClips(models, test_)), test_)};
    });
  }

  void RunOrderSweep() {
    Stage("order-sweep", [&] {
      const auto enroll = Enrollment();
      for (int order : cfg_.order_sweep) {
        auto models = TrainGmms(enroll, order);
        pop_->order_sweep.push_back(
            {order, {Rate(Indices(ClassifyClips(models, val_)), val_),
                     Rate(Indices(ClassifyClips(models, test_)), test_)}});
      }
    });
  }

  void RunLda() {
    LdaBasis full;
    Stage("lda-scatter", [&] {
      std::vector<LabeledFeatures> classes;
      for (const auto &s : corpus_.speakers) classes.push_back({s.speaker_id, s.enroll});
      ScatterPair scatter = ScatterMatrices(classes, cfg_.lda_global_mean);
      std::optional<double> ridge;
      if (cfg_.lda_ridge > 0.0) ridge = cfg_.lda_ridge;
      full = ComputeLdaBasis(scatter, static_cast<int>(scatter.s_b.rows()), ridge);
      for (const auto &w : full.warnings) pop_->warnings.push_back(w);
    });
    std::vector<int> dims = cfg_.lda_dims;
    if (dims.empty())
      for (int k = 1; k <= static_cast<int>(full.output_dims()); ++k) dims.push_back(k);
    std::set<int> seen;
    for (int k : dims) {
      if (k > static_cast<int>(full.output_dims()))
        throw ArgumentError("lda.dims entry " + std::to_string(k) + " exceeds feature dims " +
                            std::to_string(full.output_dims()));
      if (!seen.insert(k).second)
        throw ArgumentError("lda.dims lists " + std::to_string(k) + " twice");
    }
    auto project_enroll = [&](const LdaBasis &b) {
      std::vector<FeatureMatrix> out(corpus_.speakers.size());
      PerSpeaker([&](std::size_t i) { out[i] = Project(b, corpus_.speakers[i].enroll); });
      return out;
    };
    Stage("lda-sweep", [&] {
      for (int k : dims) {
        const LdaBasis b = Truncate(full, k);
        auto models = TrainGmms(project_enroll(b), cfg_.gmm_order);
        pop_->lda_sweep.push_back({k, Rate(Indices(ClassifyClips(models, val_, &b)), val_)});
      }
      pop_->lda_k_star = JointOptimalDimension(pop_->lda_sweep);
      pop_->lda_k_accuracy = AccuracyOptimalDimension(pop_->lda_sweep);
    });
    const LdaBasis basis = Truncate(full, pop_->lda_k_star);
    std::vector<SpeakerGmm> models;
    Stage("lda-gmm-train", [&] { models = TrainGmms(project_enroll(basis), cfg_.gmm_order); });
    Stage("lda-gmm-test", [&] {
      auto val = ClassifyClips(models, val_, &basis);
      auto test = ClassifyClips(models, test_, &basis);
      lda_val_ = Indices(val);
      lda_test_ = Indices(test);
      for (auto &d : val) g2_val_.push_back(std::move(d.scores));
      for (auto &d : test) g2_test_.push_back(std::move(d.scores));
      pop_->lda_gmm = ClassifierRates{Rate(lda_val_, val_), Rate(lda_test_, test_)};
    });
  }

  void RunFusion() {
    Stage("fusion-search", [&] {
      pop_->fusion_weights =
          OptimizeWeight(g1_val_, g2_val_, val_labels_, cfg_.fusion_p_step, cfg_.fusion_mode);
    });
    Stage("fusion-test", [&] {
      comb_test_.resize(test_.size());
      for (std::size_t i = 0; i < test_.size(); ++i)
        comb_test_[i] = ClassifyCombined(g1_test_[i], g2_test_[i], pop_->fusion_weights->p_star,
                                         cfg_.fusion_mode);
      pop_->combined = ClassifierRates{pop_->fusion_weights->rate, Rate(comb_test_, test_)};
    });
  }

  void RecordDecisions() {
    auto id = [&](const std::vector<std::size_t> &d, std::size_t i) {
      return d.empty() ? std::string() : corpus_.speakers[d[i]].speaker_id;
    };
    for (std::size_t i = 0; i < test_.size(); ++i)
      pop_->decisions.push_back({test_[i].name, corpus_.speakers[test_[i].speaker].speaker_id,
                                 id(pca_test_, i), id(lda_test_, i), id(comb_test_, i)});
    checkpoint_();
  }

  const ExperimentConfig &cfg_;
  const Corpus &corpus_;
  ExperimentReport *report_;
  std::function<void()> checkpoint_;
  unsigned threads_;
  std::vector<Clip> val_, test_;
  std::vector<std::size_t> val_labels_;
  PopulationReport *pop_ = nullptr;

  std::vector<Vector> g1_val_, g1_test_, g2_val_, g2_test_;
  std::vector<std::size_t> pca_val_, pca_test_, lda_val_, lda_test_, comb_test_;
};

}  // namespace

ExperimentReport RunExperiment(const ExperimentConfig &cfg, const Corpus &corpus,
                               const std::optional<fs::path> &out_dir) {
  cfg.Validate();
  ExperimentReport report;
  report.version = LibraryVersion();
  report.config = ConfigToIni(cfg);
  std::vector<int> pops = cfg.populations;
  if (pops.empty()) pops.push_back(static_cast<int>(corpus.speakers.size()));
  for (int s : pops) {
    const Corpus sub = FirstSpeakers(corpus, s);
    report.populations.emplace_back();
    auto checkpoint = [&] {
      if (out_dir) WriteReport(report, *out_dir);
    };
    Runner(cfg, sub, &report, checkpoint).Run(&report.populations.back());
  }
  return report;
}

ExperimentReport RunExperiment(const ExperimentConfig &cfg, const std::optional<fs::path> &out_dir) {
  cfg.Validate();
  Corpus corpus;
  try {
    corpus = LoadExperimentCorpus(cfg);
  } catch (...) {
    RethrowWith("stage 'corpus': ");
  }
  return RunExperiment(cfg, corpus, out_dir);
}

}  // namespace spkr
