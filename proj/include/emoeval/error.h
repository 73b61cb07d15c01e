// include/emoeval/error.h

// Copyright 2026 The emoeval Authors
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

#ifndef EMOEVAL_ERROR_H_
#define EMOEVAL_ERROR_H_

#include <stdexcept>
#include <string>

namespace emoeval {

// Precondition on a value failed (out-of-range score, empty signal, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent or incomplete configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A metric whose definition does not apply to the given data (zero variance,
// no overlap, all-zero denominators).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The operation needs data the input does not carry (e.g. word alignments).
class UnsupportedOpError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace emoeval

#endif  // EMOEVAL_ERROR_H_
