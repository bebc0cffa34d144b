// spkr/corpus.h

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

#ifndef SPKR_CORPUS_H_
#define SPKR_CORPUS_H_

// Corpus ingestion and the enroll / validate / test split.
//
// A manifest is a text file with one "speaker_id path" pair per line, '#'
// starting a comment. Utterances of a speaker keep their manifest order and
// are numbered from 1; speakers keep the order of their first appearance.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spkr/features.h"

namespace spkr {

struct ManifestSpeaker {
  std::string speaker_id;
  std::vector<std::filesystem::path> utterances;
};

struct CorpusManifest {
  std::vector<ManifestSpeaker> speakers;
};

// Relative paths are resolved against base_dir.
CorpusManifest ParseManifest(const std::string &text, const std::filesystem::path &base_dir = {});
CorpusManifest ReadManifest(const std::filesystem::path &path);

// Utterances (1-based) concatenated in the listed order, of which the first
// `seconds` are kept.
struct SegmentSpec {
  std::vector<int> utterances;
  double seconds = 0.0;
};

struct SplitSpec {
  SegmentSpec enroll{{3, 4, 5, 6, 7, 8}, 12.0};
  SegmentSpec validate{{1, 2}, 4.0};
  SegmentSpec test{{9, 10}, 4.0};

  // Throws ArgumentError for empty or non-positive segments, indices below 1
  // or an utterance used by more than one segment.
  void Validate() const;
};

// "3-8", "1,2" or "1-2,9".
std::vector<int> ParseIndexList(const std::string &text);
std::string FormatIndexList(const std::vector<int> &indices);

struct SpeakerData {
  std::string speaker_id;
  FeatureMatrix enroll;
  std::vector<FeatureMatrix> validate;
  std::vector<FeatureMatrix> test;
};

struct Corpus {
  std::vector<SpeakerData> speakers;

  std::size_t dims() const;
  std::size_t validate_clips() const;
  std::size_t test_clips() const;
};

// Cuts the three segments from each speaker's audio and extracts features.
// Missing utterances or too little audio raise ArgumentError naming every
// failing speaker and the shortfall in samples.
Corpus SplitCorpus(const CorpusManifest &manifest, const SplitSpec &split,
                   const FrontendConfig &frontend, unsigned threads = 0);

// Same cut on in-memory audio; utterances[u] is utterance u + 1.
SpeakerData SplitSpeaker(const std::string &speaker_id, const std::vector<AudioClip> &utterances,
                         const SplitSpec &split, const FrontendConfig &frontend);

struct SynthSpec {
  std::uint64_t seed = 7;
  int speakers = 20;
  int gen_order = 8;
  double separation = 10.0;
  int dims = 39;
  int enroll_frames = 1198;
  int clip_frames = 398;
  int validate_clips = 1;
  int test_clips = 1;

  void Validate() const;
};

// Every speaker is a diagonal GMM of order gen_order built from one shared
// base mixture: means move by separation * 0.06 * z and log-variances by
// separation * 0.07 * z (z standard normal per speaker, component and
// dimension). separation = 0 makes all generators identical. Segments are
// sampled independently; speaker s draws from its own stream seeded by
// (seed, s), so a corpus prefix does not depend on the total speaker count.
Corpus SynthCorpus(const SynthSpec &spec);

// First `count` speakers in order; ArgumentError if fewer exist.
Corpus FirstSpeakers(const Corpus &corpus, std::size_t count);

// <dir>/speakers.txt lists ids; <dir>/<id>/enroll.feat, validate_NN.feat and
// test_NN.feat hold the feature segments.
void SaveCorpus(const Corpus &corpus, const std::filesystem::path &dir);
Corpus LoadCorpus(const std::filesystem::path &dir);

}  // namespace spkr

#endif  // SPKR_CORPUS_H_
