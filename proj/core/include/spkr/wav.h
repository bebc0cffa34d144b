// spkr/wav.h

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

#ifndef SPKR_WAV_H_
#define SPKR_WAV_H_

#include <filesystem>
#include <string>

#include "spkr/features.h"

namespace spkr {

// Only RIFF/WAVE, PCM (format tag 1), mono, 16 bits per sample is accepted;
// anything else raises FormatError naming what was found.
AudioClip DecodeWav(const std::string &bytes);
AudioClip ReadWav(const std::filesystem::path &path);

// Writes 16-bit mono PCM, clipping samples to [-1, 1].
void WriteWav(const AudioClip &clip, const std::filesystem::path &path);

}  // namespace spkr

#endif  // SPKR_WAV_H_
