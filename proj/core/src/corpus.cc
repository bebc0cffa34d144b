// spkr/corpus.cc

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

#include "spkr/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "spkr/envelope.h"
#include "spkr/errors.h"
#include "spkr/parallel.h"
#include "spkr/wav.h"

namespace spkr {

namespace fs = std::filesystem;

CorpusManifest ParseManifest(const std::string &text, const fs::path &base_dir) {
  CorpusManifest manifest;
  std::map<std::string, std::size_t> index;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string id, path, extra;
    if (!(fields >> id)) continue;
    if (!(fields >> path) || (fields >> extra))
      throw FormatError("manifest line " + std::to_string(lineno) +
                        ": expected 'speaker_id path'");
    fs::path p(path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    auto [it, inserted] = index.emplace(id, manifest.speakers.size());
    if (inserted) manifest.speakers.push_back({id, {}});
    manifest.speakers[it->second].utterances.push_back(std::move(p));
  }
  return manifest;
}

CorpusManifest ReadManifest(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseManifest(ss.str(), path.parent_path());
}

void SplitSpec::Validate() const {
  std::set<int> used;
  auto check = [&](const SegmentSpec &seg, const char *name) {
    if (seg.utterances.empty())
      throw ArgumentError(std::string("split: ") + name + " lists no utterances");
    if (!(seg.seconds > 0.0))
      throw ArgumentError(std::string("split: ") + name + " length must be positive");
    for (int u : seg.utterances) {
      if (u < 1) throw ArgumentError(std::string("split: ") + name + " utterance index below 1");
      if (!used.insert(u).second)
        throw ArgumentError("split: utterance " + std::to_string(u) +
                            " is used by more than one segment");
    }
  };
  check(enroll, "enroll");
  check(validate, "validate");
  check(test, "test");
}

std::vector<int> ParseIndexList(const std::string &text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      auto dash = item.find('-', 1);
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } else {
        int lo = std::stoi(item.substr(0, dash), &used);
        if (used != dash) throw std::invalid_argument(item);
        std::string rest = item.substr(dash + 1);
        int hi = std::stoi(rest, &used);
        if (used != rest.size() || hi < lo) throw std::invalid_argument(item);
        for (int v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error &) {
      throw ArgumentError("bad index list '" + text + "'");
    }
  }
  return out;
}

std::string FormatIndexList(const std::vector<int> &indices) {
  std::string out;
  for (std::size_t i = 0; i < indices.size();) {
    std::size_t j = i;
    while (j + 1 < indices.size() && indices[j + 1] == indices[j] + 1) ++j;
    if (!out.empty()) out += ',';
    out += std::to_string(indices[i]);
    if (j > i) out += '-' + std::to_string(indices[j]);
    i = j + 1;
  }
  return out;
}

std::size_t Corpus::dims() const {
  return speakers.empty() ? 0 : speakers.front().enroll.dims();
}

std::size_t Corpus::validate_clips() const {
  std::size_t n = 0;
  for (const auto &s : speakers) n += s.validate.size();
  return n;
}

std::size_t Corpus::test_clips() const {
  std::size_t n = 0;
  for (const auto &s : speakers) n += s.test.size();
  return n;
}

namespace {

// Concatenates the segment's utterances and keeps the leading samples. An
// empty string result means success; otherwise it describes the shortfall.
std::string CutSegment(const std::vector<AudioClip> &utts, const SegmentSpec &seg,
                       const char *name, AudioClip *out) {
  int rate = 0;
  for (int u : seg.utterances) {
    if (static_cast<std::size_t>(u) > utts.size())
      return std::string(name) + " needs utterance " + std::to_string(u) + " but only " +
             std::to_string(utts.size()) + " exist";
    if (rate == 0) rate = utts[u - 1].sample_rate;
    if (utts[u - 1].sample_rate != rate)
      return std::string(name) + " mixes sample rates " + std::to_string(rate) + " and " +
             std::to_string(utts[u - 1].sample_rate);
  }
  const auto want = static_cast<std::size_t>(std::llround(seg.seconds * rate));
  out->sample_rate = rate;
  out->samples.clear();
  out->samples.reserve(want);
  for (int u : seg.utterances) {
    const auto &s = utts[u - 1].samples;
    const std::size_t take = std::min(s.size(), want - out->samples.size());
    out->samples.insert(out->samples.end(), s.begin(), s.begin() + take);
    if (out->samples.size() == want) break;
  }
  if (out->samples.size() < want)
    return std::string(name) + " is short by " + std::to_string(want - out->samples.size()) +
           " samples (" + std::to_string(out->samples.size()) + " of " + std::to_string(want) +
           ")";
  return {};
}

}  // namespace

SpeakerData SplitSpeaker(const std::string &speaker_id, const std::vector<AudioClip> &utterances,
                         const SplitSpec &split, const FrontendConfig &frontend) {
  split.Validate();
  AudioClip enroll, validate, test;
  std::string problems;
  for (auto [seg, name, clip] : {std::tuple{&split.enroll, "enroll", &enroll},
                                 std::tuple{&split.validate, "validate", &validate},
                                 std::tuple{&split.test, "test", &test}}) {
    std::string err = CutSegment(utterances, *seg, name, clip);
    if (!err.empty()) problems += (problems.empty() ? "" : "; ") + err;
  }
  if (!problems.empty())
    throw ArgumentError("speaker '" + speaker_id + "': " + problems);
  SpeakerData out;
  out.speaker_id = speaker_id;
  out.enroll = ExtractFeatures(enroll, frontend);
  out.validate.push_back(ExtractFeatures(validate, frontend));
  out.test.push_back(ExtractFeatures(test, frontend));
  return out;
}

Corpus SplitCorpus(const CorpusManifest &manifest, const SplitSpec &split,
                   const FrontendConfig &frontend, unsigned threads) {
  split.Validate();
  frontend.Validate();
  const std::size_t n = manifest.speakers.size();
  Corpus corpus;
  corpus.speakers.resize(n);
  std::vector<std::string> errors(n);
  ParallelFor(n, threads, [&](std::size_t i) {
    const auto &spk = manifest.speakers[i];
    try {
      std::vector<AudioClip> audio;
      audio.reserve(spk.utterances.size());
      for (const auto &p : spk.utterances) audio.push_back(ReadWav(p));
      corpus.speakers[i] = SplitSpeaker(spk.speaker_id, audio, split, frontend);
    } catch (const ArgumentError &e) {
      errors[i] = e.what();
    }
  });
  std::string all;
  for (const auto &e : errors)
    if (!e.empty()) all += "\n  " + e;
  if (!all.empty()) throw ArgumentError("insufficient audio:" + all);
  return corpus;
}

void SynthSpec::Validate() const {
  if (speakers < 2) throw ArgumentError("synth: need at least 2 speakers");
  if (gen_order < 1) throw ArgumentError("synth: generator order must be >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw ArgumentError("synth: separation must be finite and >= 0");
  if (dims < 1) throw ArgumentError("synth: dims must be >= 1");
  if (enroll_frames < 2 || clip_frames < 1)
    throw ArgumentError("synth: frame counts too small");
  if (validate_clips < 1 || test_clips < 1)
    throw ArgumentError("synth: need at least one validation and one test clip");
}

namespace {

constexpr double kMeanShift = 0.06;
constexpr double kLogVarShift = 0.07;

struct Generator {
  Vector weights;
  Matrix means;
  Matrix stddev;
};

std::seed_seq SeedFor(std::uint64_t seed, std::uint64_t stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream),
                       static_cast<std::uint32_t>(stream >> 32)};
}

FeatureMatrix Sample(const Generator &g, int frames, std::mt19937_64 &rng) {
  std::discrete_distribution<std::size_t> pick(g.weights.begin(), g.weights.end());
  std::normal_distribution<double> z;
  Matrix x(g.means.rows(), frames);
  for (int t = 0; t < frames; ++t) {
    const std::size_t c = pick(rng);
    for (std::size_t d = 0; d < x.rows(); ++d) x(d, t) = g.means(d, c) + g.stddev(d, c) * z(rng);
  }
  return FeatureMatrix(std::move(x), 10.0, 25.0, "SYNTH");
}

}  // namespace

Corpus SynthCorpus(const SynthSpec &spec) {
  spec.Validate();
  const std::size_t m = spec.dims, n = spec.gen_order;
  std::seed_seq base_seed = SeedFor(spec.seed, ~std::uint64_t{0});
  std::mt19937_64 base_rng(base_seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Generator base{Vector(n), Matrix(m, n), Matrix(m, n)};
  Matrix base_log_var(m, n);
  double total = 0.0;
  for (double &w : base.weights) total += (w = u(base_rng));
  for (double &w : base.weights) w /= total;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t d = 0; d < m; ++d) {
      base.means(d, c) = 1.5 * z(base_rng);
      base_log_var(d, c) = 0.25 * z(base_rng);
    }

  Corpus corpus;
  corpus.speakers.resize(spec.speakers);
  for (int s = 0; s < spec.speakers; ++s) {
    std::seed_seq seed = SeedFor(spec.seed, static_cast<std::uint64_t>(s));
    std::mt19937_64 rng(seed);
    Generator g = base;
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t d = 0; d < m; ++d) {
        g.means(d, c) += spec.separation * kMeanShift * z(rng);
        const double log_var = base_log_var(d, c) + spec.separation * kLogVarShift * z(rng);
        g.stddev(d, c) = std::exp(0.5 * log_var);
      }
    char id[32];
    std::snprintf(id, sizeof(id), "spk%03d", s + 1);
    SpeakerData &out = corpus.speakers[s];
    out.speaker_id = id;
    out.enroll = Sample(g, spec.enroll_frames, rng);
    for (int v = 0; v < spec.validate_clips; ++v)
      out.validate.push_back(Sample(g, spec.clip_frames, rng));
    for (int t = 0; t < spec.test_clips; ++t) out.test.push_back(Sample(g, spec.clip_frames, rng));
  }
  return corpus;
}

Corpus FirstSpeakers(const Corpus &corpus, std::size_t count) {
  if (count > corpus.speakers.size())
    throw ArgumentError("population of " + std::to_string(count) + " requested but corpus has " +
                        std::to_string(corpus.speakers.size()) + " speakers");
  Corpus out;
  out.speakers.assign(corpus.speakers.begin(), corpus.speakers.begin() + count);
  return out;
}

namespace {

std::string ClipName(const char *prefix, std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s_%02zu.feat", prefix, i + 1);
  return buf;
}

}  // namespace

void SaveCorpus(const Corpus &corpus, const fs::path &dir) {
  fs::create_directories(dir);
  std::string ids;
  for (const auto &s : corpus.speakers) {
    ids += s.speaker_id + "\n";
    const fs::path sd = dir / s.speaker_id;
    fs::create_directories(sd);
    SaveFeatures(s.enroll, sd / "enroll.feat");
    for (std::size_t i = 0; i < s.validate.size(); ++i)
      SaveFeatures(s.validate[i], sd / ClipName("validate", i));
    for (std::size_t i = 0; i < s.test.size(); ++i)
      SaveFeatures(s.test[i], sd / ClipName("test", i));
  }
  WriteFileAtomically(dir / "speakers.txt", ids);
}

Corpus LoadCorpus(const fs::path &dir) {
  std::ifstream in(dir / "speakers.txt");
  if (!in) throw FormatError("cannot open " + (dir / "speakers.txt").string());
  Corpus corpus;
  std::string id;
  while (in >> id) {
    SpeakerData s;
    s.speaker_id = id;
    const fs::path sd = dir / id;
    s.enroll = LoadFeatures(sd / "enroll.feat");
    for (std::size_t i = 0; fs::exists(sd / ClipName("validate", i)); ++i)
      s.validate.push_back(LoadFeatures(sd / ClipName("validate", i)));
    for (std::size_t i = 0; fs::exists(sd / ClipName("test", i)); ++i)
      s.test.push_back(LoadFeatures(sd / ClipName("test", i)));
    if (s.validate.empty() || s.test.empty())
      throw FormatError("speaker '" + id + "' has no validation or test clips in " + sd.string());
    corpus.speakers.push_back(std::move(s));
  }
  if (corpus.speakers.size() < 2) throw FormatError(dir.string() + ": fewer than 2 speakers");
  return corpus;
}

}  // namespace spkr
