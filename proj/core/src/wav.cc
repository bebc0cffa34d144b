// spkr/wav.cc

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

#include "spkr/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "spkr/envelope.h"
#include "spkr/errors.h"

namespace spkr {

namespace {

std::uint32_t U32(const std::string &b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t U16(const std::string &b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

void PutU32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string &out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioClip DecodeWav(const std::string &bytes) {
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0)
    throw FormatError("not a RIFF/WAVE file");
  std::size_t pos = 12;
  bool have_fmt = false;
  int rate = 0;
  AudioClip clip;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t size = U32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) throw FormatError("truncated '" + id + "' chunk");
    if (id == "fmt ") {
      if (size < 16) throw FormatError("fmt chunk too short");
      const std::uint16_t tag = U16(bytes, body);
      const std::uint16_t channels = U16(bytes, body + 2);
      rate = static_cast<int>(U32(bytes, body + 4));
      const std::uint16_t bits = U16(bytes, body + 14);
      if (tag != 1) throw FormatError("unsupported WAV format tag " + std::to_string(tag) +
                                      " (only 16-bit PCM is accepted)");
      if (channels != 1)
        throw FormatError("WAV has " + std::to_string(channels) + " channels; mono required");
      if (bits != 16)
        throw FormatError("WAV has " + std::to_string(bits) + " bits per sample; 16 required");
      if (rate <= 0) throw FormatError("WAV declares a non-positive sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("data chunk precedes fmt chunk");
      const std::size_t n = size / 2;
      clip.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        clip.samples[i] = static_cast<std::int16_t>(U16(bytes, body + 2 * i)) / 32768.0;
      clip.sample_rate = rate;
      return clip;
    }
    pos = body + size + (size & 1);
  }
  throw FormatError(have_fmt ? "WAV has no data chunk" : "WAV has no fmt chunk");
}

AudioClip ReadWav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return DecodeWav(bytes);
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void WriteWav(const AudioClip &clip, const std::filesystem::path &path) {
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out = "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(clip.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (double s : clip.samples) {
    const double v = std::clamp(s, -1.0, 1.0) * 32767.0;
    PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(v))));
  }
  WriteFileAtomically(path, out);
}

}  // namespace spkr
