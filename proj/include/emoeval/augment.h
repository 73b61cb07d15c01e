// include/emoeval/augment.h

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

#ifndef EMOEVAL_AUGMENT_H_
#define EMOEVAL_AUGMENT_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "emoeval/corpus.h"
#include "emoeval/dsp.h"
#include "emoeval/rng.h"
#include "json.hpp"

namespace emoeval {
namespace augment {

using dsp::Waveform;
using corpus::WordAlignment;

enum class NoiseCategory {
  kNatEnv,
  kHumEnv,
  kIntEnv,
  kSpeedUtt,
  kSpeedSeg,
  kFadeIn,
  kFadeOut,
  kFillerShort,
  kFillerLong,
  kDropWord,
  kDropLetters,
  kLaugh,
  kCry,
  kPitchUp,
  kPitchDown,
  kReverb,
};

const std::vector<NoiseCategory>& AllCategories();
std::string CategoryName(NoiseCategory c);
NoiseCategory ParseCategory(const std::string& name);
bool IsEnvironmental(NoiseCategory c);
bool NeedsAsset(NoiseCategory c);
bool NeedsAlignments(NoiseCategory c);

enum class Position { kAtStart, kContinuous, kNotApplicable };

enum class PerceptionClass { kRetaining, kAltering };

std::string PerceptionName(PerceptionClass p);

enum class LetterRule {
  kHVowel,            // /h/ + vowel, word-initial h dropped
  kVowelNdConsonant,  // vowel + /nd/ before a consonant-initial next word
  kConsonantTConsonant,
  kVowelRConsonant,
  kIngToIn,           // /ing/ -> /in/
};

const std::vector<LetterRule>& AllLetterRules();
std::string LetterRuleName(LetterRule r);
LetterRule ParseLetterRule(const std::string& name);

struct RoomParams {
  double room_size = 0.5;  // [0, 1], maps to comb feedback
  double wet_ratio = 0.3;  // [0, 1]
  std::vector<double> delays_ms = {29.7, 37.1, 41.1, 43.7};
};

struct NoiseSpec {
  NoiseCategory category = NoiseCategory::kReverb;
  Position position = Position::kNotApplicable;
  // Additive noise level: environmental noise and vocal bursts.
  double snr_db = 10.0;
  // SpeedUtt / SpeedSeg.
  double speed_factor = 1.25;
  std::optional<std::pair<double, double>> segment_s;
  double max_segment_fraction = 0.25;
  // FadeIn / FadeOut, percent per second.
  double fade_rate_pct = 2.0;
  // PitchUp / PitchDown: fundamental scales by 2^(steps * semitones/12).
  int pitch_steps = 3;
  double semitones_per_step = 1.0;
  RoomParams room;
  // DropWord / DropLetters: probability of applying to each match.
  double drop_probability = 1.0;
  std::set<LetterRule> letter_rules;  // empty means all rules
  // FillerLong pause on both sides of the filler.
  double pause_s = 0.5;
  // Laugh / Cry start time.
  double burst_position_s = 0.0;
  // Environmental clip, filler clip or burst clip.
  std::string source_asset;
};

// Throws ConfigError for out-of-range parameters or a missing asset path.
void ValidateSpec(const NoiseSpec& spec);

// Canonical JSON with only the fields relevant to the category; key order is
// fixed so that the hash is stable.
nlohmann::ordered_json SpecToJson(const NoiseSpec& spec);
NoiseSpec SpecFromJson(const nlohmann::json& j);
std::string SpecHash(const NoiseSpec& spec);

// Category -> class. The default table groups vocal bursts, pitch, whole
// utterance speed and fillers as altering; everything else retains.
class PerceptionTable {
 public:
  PerceptionTable();
  void Override(NoiseCategory c, PerceptionClass p) { table_[c] = p; }
  PerceptionClass Classify(NoiseCategory c) const { return table_.at(c); }
  PerceptionClass Classify(const NoiseSpec& spec) const {
    return Classify(spec.category);
  }
  std::vector<NoiseCategory> Members(PerceptionClass p) const;

 private:
  std::map<NoiseCategory, PerceptionClass> table_;
};

// Named environmental SNR presets, in dB SNR. "levels" is {20, 10, 0};
// "relative" expresses noise 5, 10 and 20 dB below the speech.
std::vector<double> EnvSnrPreset(const std::string& name);

struct Edit {
  Waveform audio;
  std::vector<std::string> transcript;
  std::optional<std::vector<WordAlignment>> alignments;
};

struct EnvResult {
  Waveform audio;
  double measured_snr_db = 0.0;
};

// Adds background noise. kContinuous mixes over the whole utterance at
// snr_db; kAtStart applies a linear fade-out reaching zero after
// fade_fraction of the utterance, with the gain of the continuous case.
EnvResult AddEnv(const Waveform& w, const Waveform& noise, Position position,
                 double snr_db, double fade_fraction = 0.5);

Waveform SpeedUtt(const Waveform& w, double factor);

Waveform SpeedSeg(const Waveform& w, double factor, double start_s, double end_s,
                  double max_fraction = 0.25);

enum class FadeDirection { kIn, kOut };

// Gain (1 - rate/100)^t for fade-out; fade-in mirrors it in time.
Waveform Fade(const Waveform& w, FadeDirection direction, double rate_pct_per_s = 2.0);

// Inserts the filler at the inter-word gap nearest the middle of the
// utterance, wrapped in pause_s of silence on each side when long_pause.
Edit InsertFiller(const Waveform& w, const std::vector<std::string>& transcript,
                  const std::optional<std::vector<WordAlignment>>& alignments,
                  const Waveform& filler, bool long_pause, double pause_s = 0.5);

const std::set<std::string>& DefaultStopset();

Edit DropWords(const Waveform& w, const std::vector<std::string>& transcript,
               const std::optional<std::vector<WordAlignment>>& alignments,
               double p, Rng* rng,
               const std::set<std::string>& stopset = DefaultStopset());

// Applies letter-dropping rules to the surface form of each word; each dropped
// letter removes its proportional slice of the word's audio span.
Edit DropLetters(const Waveform& w, const std::vector<std::string>& transcript,
                 const std::optional<std::vector<WordAlignment>>& alignments,
                 const std::set<LetterRule>& rules, double p, Rng* rng);

// Surface form after the rules, without audio. Exposed for tests.
std::string ApplyLetterRules(const std::string& word, const std::string& next_word,
                             const std::set<LetterRule>& rules,
                             std::vector<size_t>* dropped = nullptr);

enum class BurstKind { kLaugh, kCry };

// Mixes the burst starting at position_s, scaled so the signal over the
// burst window sits snr_db above it. +inf snr adds nothing.
Waveform AddVocalBurst(const Waveform& w, const Waveform& burst, double snr_db,
                       double position_s);

double PitchRatio(int steps, double semitones_per_step);

// Resample then WSOLA stretch back to the input length.
Waveform PitchShift(const Waveform& w, int steps, double semitones_per_step = 1.0);

// Schroeder reverberator: parallel feedback combs at the configured delays
// followed by two allpass stages. The wet path is scaled to unit impulse
// response energy and added to the dry signal.
Waveform Reverb(const Waveform& w, const RoomParams& room);
Waveform Reverb(const Waveform& w, const RoomParams& room, bool normalize_peak);

struct AugmentInput {
  std::string id;
  Waveform audio;
  std::vector<std::string> transcript;
  std::optional<std::vector<WordAlignment>> alignments;
};

struct AugmentResult {
  Edit edit;
  PerceptionClass perception = PerceptionClass::kRetaining;
  std::optional<double> measured_snr_db;
  std::string spec_hash;
  uint64_t seed = 0;
};

using AssetLoader = std::function<Waveform(const std::string& path)>;

// Loads and caches WAV assets.
AssetLoader CachingWavLoader(const std::string& base_dir = "");

// Per-sample seed from (global seed, utterance id, spec hash).
uint64_t SampleSeed(uint64_t global_seed, const std::string& utterance_id,
                    const std::string& spec_hash);

// Dispatches on the category. Deterministic for a fixed (input, spec, seed).
AugmentResult Apply(const AugmentInput& input, const NoiseSpec& spec,
                    uint64_t global_seed, const AssetLoader& loader,
                    const PerceptionTable& table = PerceptionTable());

}  // namespace augment
}  // namespace emoeval

#endif  // EMOEVAL_AUGMENT_H_
