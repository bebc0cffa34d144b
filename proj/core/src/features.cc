// spkr/features.cc

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

#include "spkr/features.h"

#include <fftw3.h>

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <sstream>

#include "spkr/envelope.h"
#include "spkr/errors.h"

namespace spkr {

namespace {

// FFTW's planner is not re-entrant; plan creation and destruction are
// serialized, execution is not.
std::mutex &FftwPlannerMutex() {
  static std::mutex mu;
  return mu;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(FftwPlannerMutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  std::span<double> input() { return {in_, n_}; }

  // Fills `mag` (n/2 + 1 bins) with |X_k|.
  void Magnitude(std::span<double> mag) {
    fftw_execute(plan_);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(out_[k][0], out_[k][1]);
  }

 private:
  std::size_t n_;
  double *in_ = nullptr;
  fftw_complex *out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

// Triangular filters equally spaced on the mel axis, each spanning its
// neighbours' centre frequencies. Row f holds the weights of filter f over
// the n_fft / 2 + 1 magnitude bins.
std::vector<Vector> MelFilterbank(const FrontendConfig &cfg, int sample_rate, std::size_t n_fft) {
  const double nyquist = sample_rate / 2.0;
  const double hi_hz = cfg.high_freq_hz > 0.0 ? std::min(cfg.high_freq_hz, nyquist) : nyquist;
  const double lo = HzToMel(cfg.low_freq_hz), hi = HzToMel(hi_hz);
  const int nf = cfg.num_mel_filters;
  Vector centres(nf + 2);
  for (int i = 0; i < nf + 2; ++i) centres[i] = lo + (hi - lo) * i / (nf + 1);

  const std::size_t nbins = n_fft / 2 + 1;
  std::vector<Vector> bank(nf, Vector(nbins, 0.0));
  for (std::size_t k = 0; k < nbins; ++k) {
    const double mel = HzToMel(static_cast<double>(k) * sample_rate / n_fft);
    for (int f = 0; f < nf; ++f) {
      const double l = centres[f], c = centres[f + 1], r = centres[f + 2];
      if (mel > l && mel < r)
        bank[f][k] = mel <= c ? (mel - l) / (c - l) : (r - mel) / (r - c);
    }
  }
  return bank;
}

std::string FeatureLabel(const FeatureMatrix &f) {
  std::ostringstream os;
  os.precision(17);
  os << "kind=" << f.kind << ";frame_ms=" << f.frame_rate_ms << ";window_ms=" << f.window_ms;
  return os.str();
}

void ParseFeatureLabel(const std::string &label, FeatureMatrix *f) {
  std::istringstream is(label);
  std::string item;
  while (std::getline(is, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw FormatError("malformed feature header item '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    try {
      if (key == "kind") f->kind = value;
      else if (key == "frame_ms") f->frame_rate_ms = std::stod(value);
      else if (key == "window_ms") f->window_ms = std::stod(value);
    } catch (const std::exception &) {
      throw FormatError("malformed feature header value '" + item + "'");
    }
  }
}

}  // namespace

void FrontendConfig::Validate() const {
  if (!(hop_ms > 0.0) || !(window_ms > hop_ms))
    throw ArgumentError("FrontendConfig: need window_ms > hop_ms > 0");
  if (num_ceps < 1) throw ArgumentError("FrontendConfig: num_ceps must be >= 1");
  if (num_mel_filters < num_ceps + 1)
    throw ArgumentError("FrontendConfig: num_mel_filters must exceed num_ceps");
  if (delta_window < 1) throw ArgumentError("FrontendConfig: delta_window must be >= 1");
  if (pre_emphasis < 0.0 || pre_emphasis >= 1.0)
    throw ArgumentError("FrontendConfig: pre_emphasis must lie in [0, 1)");
}

std::size_t WindowSamples(const FrontendConfig &cfg, int sample_rate) {
  return static_cast<std::size_t>(std::llround(sample_rate * cfg.window_ms / 1000.0));
}

std::size_t HopSamples(const FrontendConfig &cfg, int sample_rate) {
  return static_cast<std::size_t>(std::llround(sample_rate * cfg.hop_ms / 1000.0));
}

std::size_t FrameCount(std::size_t num_samples, const FrontendConfig &cfg, int sample_rate) {
  const std::size_t win = WindowSamples(cfg, sample_rate), hop = HopSamples(cfg, sample_rate);
  if (num_samples < win) return 0;
  return 1 + (num_samples - win) / hop;
}

FeatureMatrix ExtractMfcc(const AudioClip &clip, const FrontendConfig &cfg) {
  cfg.Validate();
  if (clip.sample_rate < 8000)
    throw ArgumentError("ExtractMfcc: sample rate " + std::to_string(clip.sample_rate) +
                        " Hz is below the 8000 Hz minimum");
  const std::size_t win = WindowSamples(cfg, clip.sample_rate);
  const std::size_t hop = HopSamples(cfg, clip.sample_rate);
  const std::size_t frames = FrameCount(clip.samples.size(), cfg, clip.sample_rate);
  if (frames == 0)
    throw ArgumentError("ExtractMfcc: clip has " + std::to_string(clip.samples.size()) +
                        " samples, shorter than one " + std::to_string(win) + "-sample window");

  std::size_t n_fft = 1;
  while (n_fft < win) n_fft <<= 1;
  const auto bank = MelFilterbank(cfg, clip.sample_rate, n_fft);
  Vector hamming(win);
  for (std::size_t i = 0; i < win; ++i)
    hamming[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (win - 1));

  const int nf = cfg.num_mel_filters;
  // Orthonormal DCT-II rows for orders 1..num_ceps.
  Matrix dct(cfg.num_ceps, nf);
  for (int k = 1; k <= cfg.num_ceps; ++k)
    for (int j = 0; j < nf; ++j)
      dct(k - 1, j) = std::sqrt(2.0 / nf) * std::cos(std::numbers::pi * k * (j + 0.5) / nf);

  const int out_dims = cfg.base_dims();
  Matrix out(out_dims, frames);
  RealFft fft(n_fft);
  Vector mag(n_fft / 2 + 1), logmel(nf);

  for (std::size_t t = 0; t < frames; ++t) {
    const double *x = clip.samples.data() + t * hop;
    auto buf = fft.input();
    // HTK-style per-frame pre-emphasis.
    buf[0] = x[0] * (1.0 - cfg.pre_emphasis) * hamming[0];
    for (std::size_t i = 1; i < win; ++i)
      buf[i] = (x[i] - cfg.pre_emphasis * x[i - 1]) * hamming[i];
    double energy = 0.0;
    for (std::size_t i = 0; i < win; ++i) energy += buf[i] * buf[i];
    std::fill(buf.begin() + win, buf.end(), 0.0);
    fft.Magnitude(mag);

    for (int f = 0; f < nf; ++f) {
      double e = 0.0;
      for (std::size_t k = 0; k < mag.size(); ++k) e += bank[f][k] * mag[k];
      logmel[f] = std::log(std::max(e, cfg.mel_floor));
    }
    auto col = out.col(t);
    for (int k = 0; k < cfg.num_ceps; ++k) {
      double c = 0.0;
      for (int j = 0; j < nf; ++j) c += dct(k, j) * logmel[j];
      col[k] = c;
    }
    if (cfg.include_energy)
      col[cfg.num_ceps] = energy > 0.0 ? std::max(std::log(energy), cfg.log_energy_floor)
                                       : cfg.log_energy_floor;
  }
  return FeatureMatrix(std::move(out), cfg.hop_ms, cfg.window_ms,
                       cfg.include_energy ? "MFCC_E" : "MFCC");
}

FeatureMatrix AppendDeltas(const FeatureMatrix &f, const FrontendConfig &cfg) {
  const std::size_t base = f.dims(), frames = f.frames();
  const int w = cfg.delta_window;
  if (w < 1) throw ArgumentError("AppendDeltas: delta_window must be >= 1");
  if (base == 0) throw ArgumentError("AppendDeltas: empty feature matrix");
  if (frames < static_cast<std::size_t>(2 * w + 1))
    throw ArgumentError("AppendDeltas: need at least " + std::to_string(2 * w + 1) +
                        " frames, got " + std::to_string(frames));
  double denom = 0.0;
  for (int k = 1; k <= w; ++k) denom += 2.0 * k * k;

  Matrix out(3 * base, frames);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t d = 0; d < base; ++d) out(d, t) = f.values(d, t);

  const auto last = static_cast<std::ptrdiff_t>(frames) - 1;
  auto regress = [&](std::size_t src_row, std::size_t dst_row) {
    for (std::ptrdiff_t t = 0; t <= last; ++t) {
      double acc = 0.0;
      for (int k = 1; k <= w; ++k) {
        const std::ptrdiff_t ahead = std::min<std::ptrdiff_t>(t + k, last);
        const std::ptrdiff_t behind = std::max<std::ptrdiff_t>(t - k, 0);
        acc += k * (out(src_row, ahead) - out(src_row, behind));
      }
      out(dst_row, t) = acc / denom;
    }
  };
  for (std::size_t d = 0; d < base; ++d) regress(d, base + d);
  for (std::size_t d = 0; d < base; ++d) regress(base + d, 2 * base + d);
  return FeatureMatrix(std::move(out), f.frame_rate_ms, f.window_ms, f.kind + "_D_A");
}

FeatureMatrix ExtractFeatures(const AudioClip &clip, const FrontendConfig &cfg) {
  return AppendDeltas(ExtractMfcc(clip, cfg), cfg);
}

void SaveFeatures(const FeatureMatrix &f, const std::filesystem::path &path) {
  Envelope env{PayloadKind::kFeatures, FeatureLabel(f), {f.values}};
  WriteEnvelope(path, env);
}

FeatureMatrix LoadFeatures(const std::filesystem::path &path) {
  Envelope env = ReadEnvelope(path, PayloadKind::kFeatures);
  if (env.blocks.size() != 1)
    throw FormatError(path.string() + ": feature file must hold exactly one block");
  FeatureMatrix f;
  ParseFeatureLabel(env.label, &f);
  f.values = std::move(env.blocks[0]);
  if (f.dims() == 0 || f.frames() == 0)
    throw FormatError(path.string() + ": feature file has zero dims or frames");
  if (!f.values.AllFinite()) throw FormatError(path.string() + ": non-finite feature values");
  return f;
}

void ExportFeaturesCsv(const FeatureMatrix &f, const std::filesystem::path &path) {
  std::string out;
  char buf[32];
  for (std::size_t t = 0; t < f.frames(); ++t) {
    for (std::size_t d = 0; d < f.dims(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", f.values(d, t));
      if (d) out += ',';
      out += buf;
    }
    out += '\n';
  }
  WriteFileAtomically(path, out);
}

}  // namespace spkr
