// spkr/envelope.h

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

#ifndef SPKR_ENVELOPE_H_
#define SPKR_ENVELOPE_H_

// Binary container shared by feature files and all trained models.
//
// Layout (all integers and reals little-endian):
//
//   char[4]  magic "SPKR"
//   u32      version (= 1)
//   u32      payload kind (PayloadKind)
//   u32      label length L, followed by L bytes of UTF-8 label
//   u32      block count B
//   B times: u64 rows, u64 cols, rows*cols f64 values in column-major order
//
// Nothing may follow the last block. Writers go through a temporary file in
// the destination directory and rename it into place, so an interrupted
// write never leaves a truncated model behind.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spkr/matrix.h"

namespace spkr {

inline constexpr char kEnvelopeMagic[4] = {'S', 'P', 'K', 'R'};
inline constexpr std::uint32_t kEnvelopeVersion = 1;

enum class PayloadKind : std::uint32_t {
  kFeatures = 1,
  kEigenspace = 2,
  kLdaBasis = 3,
  kGmm = 4,
};

struct Envelope {
  PayloadKind kind = PayloadKind::kFeatures;
  std::string label;
  std::vector<Matrix> blocks;
};

std::string EncodeEnvelope(const Envelope &env);
// Throws FormatError on bad magic, unknown version, truncation or trailing
// bytes. ReadEnvelope additionally rejects a payload of the wrong kind.
Envelope DecodeEnvelope(const std::string &bytes);

void WriteEnvelope(const std::filesystem::path &path, const Envelope &env);
Envelope ReadEnvelope(const std::filesystem::path &path, PayloadKind expected);

// Atomic text write (temp file + rename), shared by the CSV/report writers.
void WriteFileAtomically(const std::filesystem::path &path, const std::string &contents);

}  // namespace spkr

#endif  // SPKR_ENVELOPE_H_
