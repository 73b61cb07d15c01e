// include/emoeval/hash.h

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

#ifndef EMOEVAL_HASH_H_
#define EMOEVAL_HASH_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace emoeval {

// 64-bit FNV-1a. Stable across platforms; used for spec hashes, config hashes
// and seed derivation.
uint64_t Fnv1a64(std::string_view data, uint64_t basis = 0xcbf29ce484222325ULL);

std::string HexDigest(uint64_t h);

// Mixes a parent seed with a string key into an independent child seed.
uint64_t DeriveSeed(uint64_t seed, std::string_view key);

}  // namespace emoeval

#endif  // EMOEVAL_HASH_H_
