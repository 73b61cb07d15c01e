// tests/attack_stub.h

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

// Threshold stub models for the attack search.

#ifndef EMOEVAL_TESTS_ATTACK_STUB_H_
#define EMOEVAL_TESTS_ATTACK_STUB_H_

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emoeval/attack.h"
#include "emoeval/rng.h"

namespace testutil {

namespace attack = emoeval::attack;
namespace augment = emoeval::augment;

// Writes the category index and the drop into the first two samples so the
// stub can read back which query it received.
inline attack::Perturber TaggingPerturber() {
  return [](const augment::AugmentInput& in, const augment::NoiseSpec& spec, int drop) {
    emoeval::dsp::Waveform w = in.audio;
    w.samples[0] = static_cast<float>(static_cast<int>(spec.category));
    w.samples[1] = static_cast<float>(drop);
    return w;
  };
}

// Flips the label iff drop >= threshold[category]. Categories without an
// entry, and untagged input, keep the clean label.
struct ThresholdStub {
  std::map<augment::NoiseCategory, int> threshold;

  std::string operator()(const emoeval::dsp::Waveform& w) const {
    const int tag = static_cast<int>(std::lround(w.samples[0]));
    const int drop = static_cast<int>(std::lround(w.samples[1]));
    if (drop <= 0) return "calm";
    auto it = threshold.find(static_cast<augment::NoiseCategory>(tag));
    return it != threshold.end() && drop >= it->second ? "agitated" : "calm";
  }

  // Smallest integer drop in [1, max_drop] that flips, by exhaustive scan.
  std::optional<int> OracleMinDrop(augment::NoiseCategory c, int max_drop = 10) const {
    for (int d = 1; d <= max_drop; ++d) {
      emoeval::dsp::Waveform w;
      w.samples = {static_cast<float>(static_cast<int>(c)), static_cast<float>(d)};
      if ((*this)(w) == "agitated") return d;
    }
    return std::nullopt;
  }
};

// Thresholds drawn per category. Perception-altering noises are more
// damaging, so their thresholds are lower on average. Values above 10 never
// flip within the search range.
inline ThresholdStub RandomThresholdStub(emoeval::Rng* rng) {
  const augment::PerceptionTable table;
  ThresholdStub s;
  for (auto c : augment::AllCategories()) {
    const bool altering = table.Classify(c) == augment::PerceptionClass::kAltering;
    s.threshold[c] = altering ? 1 + static_cast<int>(rng->UniformInt(14))
                              : 4 + static_cast<int>(rng->UniformInt(20));
  }
  return s;
}

// A sampler that needs no assets and no randomness beyond the category.
inline attack::SpecSampler PlainSampler() {
  return [](augment::NoiseCategory c, emoeval::Rng*) {
    augment::NoiseSpec s;
    s.category = c;
    if (augment::NeedsAsset(c)) s.source_asset = "unused.wav";
    if (augment::IsEnvironmental(c)) s.position = augment::Position::kContinuous;
    return s;
  };
}

inline augment::AugmentInput SilentInput(const std::string& id) {
  augment::AugmentInput in;
  in.id = id;
  in.audio.samples.assign(160, 0.0f);
  in.transcript = {"hello"};
  in.alignments = std::vector<emoeval::corpus::WordAlignment>{{"hello", 0.0, 0.01}};
  return in;
}

}  // namespace testutil

#endif  // EMOEVAL_TESTS_ATTACK_STUB_H_
