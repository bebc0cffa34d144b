// spkr/features.h

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

#ifndef SPKR_FEATURES_H_
#define SPKR_FEATURES_H_

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

#include "spkr/matrix.h"

namespace spkr {

struct AudioClip {
  Vector samples;  // mono, nominally in [-1, 1]
  int sample_rate = 16000;

  double duration_ms() const { return 1000.0 * samples.size() / sample_rate; }
};

/// HTK-style front end. Defaults give 13 static coefficients per frame
/// (cepstra c1..c12 plus log energy) at a 10 ms hop with 25 ms Hamming
/// windows; with deltas and double deltas that is 39 dims.
struct FrontendConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int num_mel_filters = 26;
  int num_ceps = 12;              // DCT orders 1..num_ceps; c0 is dropped
  double pre_emphasis = 0.97;
  int delta_window = 2;
  bool include_energy = true;
  double log_energy_floor = std::log(1e-10);
  double mel_floor = 1e-10;
  double low_freq_hz = 0.0;
  double high_freq_hz = 0.0;      // <= 0 means Nyquist

  int base_dims() const { return num_ceps + (include_energy ? 1 : 0); }
  void Validate() const;
};

/// M x T cepstral features, one frame per column.
struct FeatureMatrix {
  Matrix values;
  double frame_rate_ms = 10.0;
  double window_ms = 25.0;
  std::string kind = "MFCC_E";

  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix v, double frame_ms = 10.0, double win_ms = 25.0,
                         std::string kind_tag = "MFCC_E")
      : values(std::move(v)), frame_rate_ms(frame_ms), window_ms(win_ms),
        kind(std::move(kind_tag)) {}

  std::size_t dims() const { return values.rows(); }
  std::size_t frames() const { return values.cols(); }
  std::span<const double> frame(std::size_t t) const { return values.col(t); }

  friend bool operator==(const FeatureMatrix &, const FeatureMatrix &) = default;
};

// Samples per analysis window and per hop at this rate.
std::size_t WindowSamples(const FrontendConfig &cfg, int sample_rate);
std::size_t HopSamples(const FrontendConfig &cfg, int sample_rate);
// 1 + floor((n - window) / hop), or 0 when n is shorter than a window.
std::size_t FrameCount(std::size_t num_samples, const FrontendConfig &cfg, int sample_rate);

/// Static MFCCs: rows 0..num_ceps-1 hold c1..c_num_ceps, the last row holds
/// the floored log energy of the pre-emphasized, windowed frame.
/// Throws ArgumentError if the clip is shorter than one window.
FeatureMatrix ExtractMfcc(const AudioClip &clip, const FrontendConfig &cfg);

/// Appends HTK regression deltas and double deltas:
///   d_t = sum_{k=1..W} k (c_{t+k} - c_{t-k}) / (2 sum_{k=1..W} k^2)
/// with the first/last frame replicated past the edges. Output is 3B x T
/// for a B x T input. Throws ArgumentError when T < 2W + 1.
FeatureMatrix AppendDeltas(const FeatureMatrix &f, const FrontendConfig &cfg);

// ExtractMfcc followed by AppendDeltas.
FeatureMatrix ExtractFeatures(const AudioClip &clip, const FrontendConfig &cfg);

void SaveFeatures(const FeatureMatrix &f, const std::filesystem::path &path);
FeatureMatrix LoadFeatures(const std::filesystem::path &path);
// Debug export, one frame per line.
void ExportFeaturesCsv(const FeatureMatrix &f, const std::filesystem::path &path);

}  // namespace spkr

#endif  // SPKR_FEATURES_H_
