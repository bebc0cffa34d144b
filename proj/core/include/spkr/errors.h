// spkr/errors.h

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

#ifndef SPKR_ERRORS_H_
#define SPKR_ERRORS_H_

#include <stdexcept>
#include <string>

namespace spkr {

// Caller passed something outside an operation's preconditions.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string &what) : std::invalid_argument(what) {}
};

// A numerical procedure could not produce a trustworthy answer
// (non-convergence, singular pencil, degenerate data).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string &what) : std::runtime_error(what) {}
};

// Malformed, truncated or unsupported file contents.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace spkr

#endif  // SPKR_ERRORS_H_
