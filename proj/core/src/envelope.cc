// spkr/envelope.cc

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

#include "spkr/envelope.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include "spkr/errors.h"

namespace spkr {

namespace {

static_assert(sizeof(double) == 8, "IEEE-754 binary64 required");

template <typename T>
T ByteSwap(T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <typename T>
void Put(std::string &out, T v) {
  if constexpr (std::endian::native == std::endian::big) v = ByteSwap(v);
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string &bytes) : bytes_(bytes) {}

  template <typename T>
  T Get(const char *what) {
    Need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big) v = ByteSwap(v);
    return v;
  }

  std::string GetString(std::size_t n, const char *what) {
    Need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void Need(std::size_t n, const char *what) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError(std::string("truncated envelope while reading ") + what);
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string &bytes_;
  std::size_t pos_ = 0;
};

std::string KindName(PayloadKind k) {
  switch (k) {
    case PayloadKind::kFeatures: return "features";
    case PayloadKind::kEigenspace: return "eigenspace";
    case PayloadKind::kLdaBasis: return "lda-basis";
    case PayloadKind::kGmm: return "gmm";
  }
  return "unknown(" + std::to_string(static_cast<std::uint32_t>(k)) + ")";
}

}  // namespace

std::string EncodeEnvelope(const Envelope &env) {
  std::string out(kEnvelopeMagic, 4);
  Put<std::uint32_t>(out, kEnvelopeVersion);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(env.kind));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(env.label.size()));
  out += env.label;
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(env.blocks.size()));
  for (const Matrix &m : env.blocks) {
    Put<std::uint64_t>(out, m.rows());
    Put<std::uint64_t>(out, m.cols());
    for (double v : m.values()) Put<double>(out, v);
  }
  return out;
}

Envelope DecodeEnvelope(const std::string &bytes) {
  if (bytes.empty()) throw FormatError("empty file");
  Reader in(bytes);
  if (in.GetString(4, "magic") != std::string(kEnvelopeMagic, 4))
    throw FormatError("bad magic bytes (not an spkr envelope)");
  const auto version = in.Get<std::uint32_t>("version");
  if (version != kEnvelopeVersion)
    throw FormatError("unsupported envelope version " + std::to_string(version));
  Envelope env;
  const auto kind = in.Get<std::uint32_t>("payload kind");
  if (kind < 1 || kind > 4) throw FormatError("unknown payload kind " + std::to_string(kind));
  env.kind = static_cast<PayloadKind>(kind);
  const auto label_len = in.Get<std::uint32_t>("label length");
  env.label = in.GetString(label_len, "label");
  const auto nblocks = in.Get<std::uint32_t>("block count");
  for (std::uint32_t b = 0; b < nblocks; ++b) {
    const auto rows = in.Get<std::uint64_t>("block rows");
    const auto cols = in.Get<std::uint64_t>("block cols");
    if (rows != 0 && cols > in.remaining() / 8 / rows)
      throw FormatError("truncated envelope: block " + std::to_string(b) + " declares " +
                        std::to_string(rows) + "x" + std::to_string(cols) + " values");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = in.Get<double>("block values");
    env.blocks.push_back(std::move(m));
  }
  if (in.remaining() != 0)
    throw FormatError(std::to_string(in.remaining()) + " trailing bytes after last block");
  return env;
}

void WriteFileAtomically(const std::filesystem::path &path, const std::string &contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void WriteEnvelope(const std::filesystem::path &path, const Envelope &env) {
  WriteFileAtomically(path, EncodeEnvelope(env));
}

Envelope ReadEnvelope(const std::filesystem::path &path, PayloadKind expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Envelope env;
  try {
    env = DecodeEnvelope(bytes);
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (env.kind != expected)
    throw FormatError(path.string() + ": expected a " + KindName(expected) + " payload, found " +
                      KindName(env.kind));
  return env;
}

}  // namespace spkr
