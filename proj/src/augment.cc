// src/augment.cc

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

#include "emoeval/augment.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "emoeval/error.h"
#include "emoeval/hash.h"

namespace emoeval {
namespace augment {

namespace {

struct CategoryInfo {
  NoiseCategory category;
  const char* name;
};

constexpr CategoryInfo kCategories[] = {
    {NoiseCategory::kNatEnv, "NatEnv"},
    {NoiseCategory::kHumEnv, "HumEnv"},
    {NoiseCategory::kIntEnv, "IntEnv"},
    {NoiseCategory::kSpeedUtt, "SpeedUtt"},
    {NoiseCategory::kSpeedSeg, "SpeedSeg"},
    {NoiseCategory::kFadeIn, "FadeIn"},
    {NoiseCategory::kFadeOut, "FadeOut"},
    {NoiseCategory::kFillerShort, "FillerShort"},
    {NoiseCategory::kFillerLong, "FillerLong"},
    {NoiseCategory::kDropWord, "DropWord"},
    {NoiseCategory::kDropLetters, "DropLetters"},
    {NoiseCategory::kLaugh, "Laugh"},
    {NoiseCategory::kCry, "Cry"},
    {NoiseCategory::kPitchUp, "PitchUp"},
    {NoiseCategory::kPitchDown, "PitchDown"},
    {NoiseCategory::kReverb, "Reverb"},
};

constexpr std::pair<LetterRule, const char*> kLetterRules[] = {
    {LetterRule::kHVowel, "h+vowel"},
    {LetterRule::kVowelNdConsonant, "vowel+nd+consonant"},
    {LetterRule::kConsonantTConsonant, "consonant+t+consonant"},
    {LetterRule::kVowelRConsonant, "vowel+r+consonant"},
    {LetterRule::kIngToIn, "ing"},
};

std::string Lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool IsVowel(char c) {
  c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool IsConsonant(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) && !IsVowel(c);
}

size_t ToSample(double t, int sample_rate) {
  return static_cast<size_t>(std::max(0L, std::lround(t * sample_rate)));
}

const std::vector<WordAlignment>& RequireAlignments(
    const std::vector<std::string>& transcript,
    const std::optional<std::vector<WordAlignment>>& alignments, const char* op) {
  if (!alignments) {
    throw UnsupportedOpError(std::string(op) + " requires word alignments");
  }
  if (alignments->size() != transcript.size()) {
    throw DomainError(std::string(op) + ": transcript and alignments disagree in length");
  }
  for (size_t i = 0; i < transcript.size(); ++i) {
    if (Lower(transcript[i]) != Lower((*alignments)[i].word)) {
      throw DomainError(std::string(op) + ": transcript word '" + transcript[i] +
                        "' does not match alignment '" + (*alignments)[i].word + "'");
    }
  }
  return *alignments;
}

// Half-open sample span to remove.
struct Cut {
  size_t begin;
  size_t end;
};

// Removes the (sorted, disjoint) cuts and maps alignment times onto the
// shortened signal. Words listed in `removed_words` are dropped from the
// alignment.
Edit Excise(const Waveform& w, std::vector<Cut> cuts,
            const std::vector<std::string>& transcript,
            const std::vector<WordAlignment>& alignments,
            const std::vector<bool>& removed_words) {
  std::sort(cuts.begin(), cuts.end(),
            [](const Cut& a, const Cut& b) { return a.begin < b.begin; });
  const size_t n = w.samples.size();
  Edit out;
  out.audio.sample_rate_hz = w.sample_rate_hz;
  size_t pos = 0;
  for (const Cut& c : cuts) {
    const size_t b = std::min(std::max(c.begin, pos), n);
    const size_t e = std::min(std::max(c.end, b), n);
    out.audio.samples.insert(out.audio.samples.end(), w.samples.begin() + pos,
                             w.samples.begin() + b);
    pos = e;
  }
  out.audio.samples.insert(out.audio.samples.end(), w.samples.begin() + pos,
                           w.samples.end());

  const double sr = w.sample_rate_hz;
  auto remap = [&](double t) {
    const size_t s = ToSample(t, w.sample_rate_hz);
    size_t removed = 0;
    for (const Cut& c : cuts) {
      if (c.begin >= s) break;
      removed += std::min(c.end, s) - c.begin;
    }
    return (static_cast<double>(s) - static_cast<double>(removed)) / sr;
  };
  std::vector<WordAlignment> aligned;
  for (size_t i = 0; i < alignments.size(); ++i) {
    if (removed_words[i]) continue;
    out.transcript.push_back(transcript[i]);
    WordAlignment a = alignments[i];
    a.start_s = remap(a.start_s);
    a.end_s = remap(a.end_s);
    aligned.push_back(std::move(a));
  }
  out.alignments = std::move(aligned);
  return out;
}

void CheckFinite(double v, const char* what) {
  if (!std::isfinite(v)) throw ConfigError(std::string(what) + " must be finite");
}

}  // namespace

const std::vector<NoiseCategory>& AllCategories() {
  static const std::vector<NoiseCategory> all = [] {
    std::vector<NoiseCategory> v;
    for (const auto& c : kCategories) v.push_back(c.category);
    return v;
  }();
  return all;
}

std::string CategoryName(NoiseCategory c) {
  for (const auto& info : kCategories) {
    if (info.category == c) return info.name;
  }
  return "?";
}

NoiseCategory ParseCategory(const std::string& name) {
  for (const auto& info : kCategories) {
    if (name == info.name) return info.category;
  }
  throw ConfigError("unknown noise category: " + name);
}

bool IsEnvironmental(NoiseCategory c) {
  return c == NoiseCategory::kNatEnv || c == NoiseCategory::kHumEnv ||
         c == NoiseCategory::kIntEnv;
}

bool NeedsAsset(NoiseCategory c) {
  return IsEnvironmental(c) || c == NoiseCategory::kFillerShort ||
         c == NoiseCategory::kFillerLong || c == NoiseCategory::kLaugh ||
         c == NoiseCategory::kCry;
}

bool NeedsAlignments(NoiseCategory c) {
  return c == NoiseCategory::kFillerShort || c == NoiseCategory::kFillerLong ||
         c == NoiseCategory::kDropWord || c == NoiseCategory::kDropLetters;
}

std::string PerceptionName(PerceptionClass p) {
  return p == PerceptionClass::kRetaining ? "retaining" : "altering";
}

const std::vector<LetterRule>& AllLetterRules() {
  static const std::vector<LetterRule> all = [] {
    std::vector<LetterRule> v;
    for (const auto& [rule, name] : kLetterRules) v.push_back(rule);
    return v;
  }();
  return all;
}

std::string LetterRuleName(LetterRule r) {
  for (const auto& [rule, name] : kLetterRules) {
    if (rule == r) return name;
  }
  return "?";
}

LetterRule ParseLetterRule(const std::string& name) {
  for (const auto& [rule, rule_name] : kLetterRules) {
    if (name == rule_name) return rule;
  }
  throw ConfigError("unknown letter rule: " + name);
}

void ValidateSpec(const NoiseSpec& spec) {
  const std::string name = CategoryName(spec.category);
  if (NeedsAsset(spec.category) && spec.source_asset.empty()) {
    throw ConfigError(name + " requires a source_asset");
  }
  switch (spec.category) {
    case NoiseCategory::kNatEnv:
    case NoiseCategory::kHumEnv:
    case NoiseCategory::kIntEnv:
      if (spec.position == Position::kNotApplicable) {
        throw ConfigError(name + " needs position at_start or continuous");
      }
      if (std::isnan(spec.snr_db)) throw ConfigError("snr_db is NaN");
      break;
    case NoiseCategory::kLaugh:
    case NoiseCategory::kCry:
      if (std::isnan(spec.snr_db)) throw ConfigError("snr_db is NaN");
      CheckFinite(spec.burst_position_s, "burst_position_s");
      if (spec.burst_position_s < 0) throw ConfigError("burst_position_s must be >= 0");
      break;
    case NoiseCategory::kSpeedUtt:
    case NoiseCategory::kSpeedSeg:
      CheckFinite(spec.speed_factor, "speed_factor");
      if (spec.speed_factor <= 0.0 || spec.speed_factor > 4.0) {
        throw ConfigError("speed_factor must be in (0, 4]");
      }
      if (spec.max_segment_fraction <= 0.0 || spec.max_segment_fraction > 1.0) {
        throw ConfigError("max_segment_fraction must be in (0, 1]");
      }
      break;
    case NoiseCategory::kFadeIn:
    case NoiseCategory::kFadeOut:
      CheckFinite(spec.fade_rate_pct, "fade_rate_pct");
      if (spec.fade_rate_pct < 0.0 || spec.fade_rate_pct >= 100.0) {
        throw ConfigError("fade_rate_pct must be in [0, 100)");
      }
      break;
    case NoiseCategory::kFillerShort:
    case NoiseCategory::kFillerLong:
      CheckFinite(spec.pause_s, "pause_s");
      if (spec.pause_s < 0.0) throw ConfigError("pause_s must be >= 0");
      break;
    case NoiseCategory::kDropWord:
    case NoiseCategory::kDropLetters:
      if (!(spec.drop_probability >= 0.0 && spec.drop_probability <= 1.0)) {
        throw ConfigError("drop_probability must be in [0, 1]");
      }
      break;
    case NoiseCategory::kPitchUp:
    case NoiseCategory::kPitchDown:
      if (spec.pitch_steps < 0 || spec.pitch_steps > 24) {
        throw ConfigError("pitch_steps is a magnitude in [0, 24]");
      }
      CheckFinite(spec.semitones_per_step, "semitones_per_step");
      if (spec.semitones_per_step <= 0.0) throw ConfigError("semitones_per_step must be > 0");
      break;
    case NoiseCategory::kReverb:
      if (!(spec.room.room_size >= 0.0 && spec.room.room_size <= 1.0) ||
          !(spec.room.wet_ratio >= 0.0 && spec.room.wet_ratio <= 1.0)) {
        throw ConfigError("room_size and wet_ratio must be in [0, 1]");
      }
      if (spec.room.delays_ms.empty()) throw ConfigError("reverb needs comb delays");
      for (double d : spec.room.delays_ms) {
        if (!(d > 0.0 && d < 1000.0)) throw ConfigError("comb delays must be in (0, 1000) ms");
      }
      break;
  }
}

nlohmann::ordered_json SpecToJson(const NoiseSpec& spec) {
  nlohmann::ordered_json j;
  j["category"] = CategoryName(spec.category);
  switch (spec.category) {
    case NoiseCategory::kNatEnv:
    case NoiseCategory::kHumEnv:
    case NoiseCategory::kIntEnv:
      j["position"] = spec.position == Position::kAtStart ? "at_start" : "continuous";
      j["snr_db"] = spec.snr_db;
      break;
    case NoiseCategory::kLaugh:
    case NoiseCategory::kCry:
      j["snr_db"] = spec.snr_db;
      j["burst_position_s"] = spec.burst_position_s;
      break;
    case NoiseCategory::kSpeedUtt:
      j["speed_factor"] = spec.speed_factor;
      break;
    case NoiseCategory::kSpeedSeg:
      j["speed_factor"] = spec.speed_factor;
      j["max_segment_fraction"] = spec.max_segment_fraction;
      if (spec.segment_s) {
        j["segment_s"] = {spec.segment_s->first, spec.segment_s->second};
      }
      break;
    case NoiseCategory::kFadeIn:
    case NoiseCategory::kFadeOut:
      j["fade_rate_pct"] = spec.fade_rate_pct;
      break;
    case NoiseCategory::kFillerShort:
      break;
    case NoiseCategory::kFillerLong:
      j["pause_s"] = spec.pause_s;
      break;
    case NoiseCategory::kDropWord:
      j["drop_probability"] = spec.drop_probability;
      break;
    case NoiseCategory::kDropLetters: {
      j["drop_probability"] = spec.drop_probability;
      std::vector<std::string> rules;
      for (LetterRule r : spec.letter_rules) rules.push_back(LetterRuleName(r));
      j["letter_rules"] = rules;
      break;
    }
    case NoiseCategory::kPitchUp:
    case NoiseCategory::kPitchDown:
      j["pitch_steps"] = spec.pitch_steps;
      j["semitones_per_step"] = spec.semitones_per_step;
      break;
    case NoiseCategory::kReverb:
      j["room_size"] = spec.room.room_size;
      j["wet_ratio"] = spec.room.wet_ratio;
      j["delays_ms"] = spec.room.delays_ms;
      break;
  }
  if (!spec.source_asset.empty()) j["source_asset"] = spec.source_asset;
  return j;
}

NoiseSpec SpecFromJson(const nlohmann::json& j) {
  static const std::set<std::string> kKnown = {
      "category", "position", "snr_db", "burst_position_s", "speed_factor",
      "max_segment_fraction", "segment_s", "fade_rate_pct", "pause_s",
      "drop_probability", "letter_rules", "pitch_steps", "semitones_per_step",
      "room_size", "wet_ratio", "delays_ms", "source_asset"};
  if (!j.is_object()) throw ConfigError("noise spec must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.count(key)) throw ConfigError("unknown noise spec field: " + key);
  }
  NoiseSpec s;
  try {
    s.category = ParseCategory(j.at("category").get<std::string>());
    if (j.contains("position")) {
      const auto pos = j.at("position").get<std::string>();
      if (pos == "at_start") {
        s.position = Position::kAtStart;
      } else if (pos == "continuous") {
        s.position = Position::kContinuous;
      } else if (pos == "n/a") {
        s.position = Position::kNotApplicable;
      } else {
        throw ConfigError("unknown position: " + pos);
      }
    } else if (IsEnvironmental(s.category)) {
      s.position = Position::kContinuous;
    }
    s.snr_db = j.value("snr_db", s.snr_db);
    s.burst_position_s = j.value("burst_position_s", s.burst_position_s);
    s.speed_factor = j.value("speed_factor", s.category == NoiseCategory::kSpeedUtt ||
                                                     s.category == NoiseCategory::kSpeedSeg
                                                 ? 1.25
                                                 : s.speed_factor);
    s.max_segment_fraction = j.value("max_segment_fraction", s.max_segment_fraction);
    if (j.contains("segment_s")) {
      const auto seg = j.at("segment_s").get<std::vector<double>>();
      if (seg.size() != 2) throw ConfigError("segment_s must be [start, end]");
      s.segment_s = std::make_pair(seg[0], seg[1]);
    }
    s.fade_rate_pct = j.value("fade_rate_pct", s.fade_rate_pct);
    s.pause_s = j.value("pause_s", s.pause_s);
    s.drop_probability = j.value("drop_probability", s.drop_probability);
    if (j.contains("letter_rules")) {
      for (const auto& r : j.at("letter_rules").get<std::vector<std::string>>()) {
        s.letter_rules.insert(ParseLetterRule(r));
      }
    }
    s.pitch_steps = j.value("pitch_steps", s.pitch_steps);
    s.semitones_per_step = j.value("semitones_per_step", s.semitones_per_step);
    s.room.room_size = j.value("room_size", s.room.room_size);
    s.room.wet_ratio = j.value("wet_ratio", s.room.wet_ratio);
    if (j.contains("delays_ms")) s.room.delays_ms = j.at("delays_ms").get<std::vector<double>>();
    s.source_asset = j.value("source_asset", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("noise spec: ") + e.what());
  }
  ValidateSpec(s);
  return s;
}

std::string SpecHash(const NoiseSpec& spec) {
  return HexDigest(Fnv1a64(SpecToJson(spec).dump()));
}

PerceptionTable::PerceptionTable() {
  for (NoiseCategory c : AllCategories()) table_[c] = PerceptionClass::kRetaining;
  for (NoiseCategory c :
       {NoiseCategory::kLaugh, NoiseCategory::kCry, NoiseCategory::kPitchUp,
        NoiseCategory::kPitchDown, NoiseCategory::kSpeedUtt,
        NoiseCategory::kFillerLong, NoiseCategory::kFillerShort}) {
    table_[c] = PerceptionClass::kAltering;
  }
}

std::vector<NoiseCategory> PerceptionTable::Members(PerceptionClass p) const {
  std::vector<NoiseCategory> out;
  for (NoiseCategory c : AllCategories()) {
    if (table_.at(c) == p) out.push_back(c);
  }
  return out;
}

std::vector<double> EnvSnrPreset(const std::string& name) {
  if (name == "levels") return {20.0, 10.0, 0.0};
  if (name == "relative") return {5.0, 10.0, 20.0};
  throw ConfigError("unknown SNR preset: " + name);
}

EnvResult AddEnv(const Waveform& w, const Waveform& noise, Position position,
                 double snr_db, double fade_fraction) {
  if (position == Position::kNotApplicable) {
    throw DomainError("environmental noise needs a position");
  }
  EnvResult out;
  out.measured_snr_db = std::numeric_limits<double>::infinity();
  if (noise.samples.empty() || dsp::SignalPower(noise) == 0.0) {
    out.audio = w;
    return out;
  }
  if (noise.sample_rate_hz != w.sample_rate_hz) {
    throw DomainError("noise asset sample rate differs from the utterance");
  }
  dsp::MixResult mixed = dsp::MixAtSnr(w, noise, snr_db, dsp::LengthPolicy::kTile);
  if (position == Position::kContinuous) {
    out.audio = std::move(mixed.mix);
    out.measured_snr_db = snr_db;
    Waveform scaled_signal = w, added = w;
    for (size_t i = 0; i < w.samples.size(); ++i) {
      scaled_signal.samples[i] = static_cast<float>(w.samples[i] * mixed.peak_scale);
      added.samples[i] = out.audio.samples[i] - scaled_signal.samples[i];
    }
    out.measured_snr_db = dsp::SnrDb(scaled_signal, added);
    return out;
  }

  if (!(fade_fraction > 0.0 && fade_fraction <= 1.0)) {
    throw DomainError("fade_fraction must be in (0, 1]");
  }
  const size_t n = w.samples.size();
  const double fade_len = std::max(1.0, fade_fraction * static_cast<double>(n));
  Waveform added = w;
  for (size_t i = 0; i < n; ++i) {
    const double env = std::max(0.0, 1.0 - static_cast<double>(i) / fade_len);
    added.samples[i] = static_cast<float>(
        mixed.noise_gain * env * noise.samples[i % noise.samples.size()]);
  }
  out.measured_snr_db = dsp::SnrDb(w, added);
  out.audio = w;
  for (size_t i = 0; i < n; ++i) out.audio.samples[i] += added.samples[i];
  dsp::PeakNormalize(&out.audio);
  return out;
}

Waveform SpeedUtt(const Waveform& w, double factor) {
  return dsp::Resample(w, factor, dsp::Interpolation::kLinear);
}

Waveform SpeedSeg(const Waveform& w, double factor, double start_s, double end_s,
                  double max_fraction) {
  const double dur = w.duration_s();
  if (!(start_s >= 0.0 && end_s >= start_s && end_s <= dur + 1e-9)) {
    throw DomainError("speed segment outside the utterance");
  }
  if (end_s - start_s > max_fraction * dur + 1e-9) {
    throw DomainError("speed segment longer than the allowed fraction");
  }
  const size_t b = std::min(ToSample(start_s, w.sample_rate_hz), w.samples.size());
  const size_t e = std::min(ToSample(end_s, w.sample_rate_hz), w.samples.size());
  if (e == b) return w;
  Waveform seg;
  seg.sample_rate_hz = w.sample_rate_hz;
  seg.samples.assign(w.samples.begin() + b, w.samples.begin() + e);
  Waveform fast = dsp::Resample(seg, factor, dsp::Interpolation::kLinear);
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples.reserve(w.samples.size());
  out.samples.insert(out.samples.end(), w.samples.begin(), w.samples.begin() + b);
  out.samples.insert(out.samples.end(), fast.samples.begin(), fast.samples.end());
  out.samples.insert(out.samples.end(), w.samples.begin() + e, w.samples.end());
  return out;
}

Waveform Fade(const Waveform& w, FadeDirection direction, double rate_pct_per_s) {
  if (!(rate_pct_per_s >= 0.0 && rate_pct_per_s < 100.0)) {
    throw DomainError("fade rate must be in [0, 100)");
  }
  if (rate_pct_per_s == 0.0) return w;
  const double per_second = 1.0 - rate_pct_per_s / 100.0;
  const double log_gain = std::log(per_second);
  const double sr = w.sample_rate_hz;
  const double total = static_cast<double>(w.samples.size()) / sr;
  Waveform out = w;
  for (size_t i = 0; i < w.samples.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    const double elapsed = direction == FadeDirection::kOut ? t : total - t;
    out.samples[i] = static_cast<float>(w.samples[i] * std::exp(log_gain * elapsed));
  }
  return out;
}

Edit InsertFiller(const Waveform& w, const std::vector<std::string>& transcript,
                  const std::optional<std::vector<WordAlignment>>& alignments,
                  const Waveform& filler, bool long_pause, double pause_s) {
  const auto& words = RequireAlignments(transcript, alignments, "filler insertion");
  if (filler.sample_rate_hz != w.sample_rate_hz) {
    throw DomainError("filler sample rate differs from the utterance");
  }
  const double mid = w.duration_s() / 2.0;
  double point = mid;
  if (words.size() == 1) {
    point = words[0].end_s;
  } else if (words.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < words.size(); ++i) {
      const double gap = 0.5 * (words[i].end_s + words[i + 1].start_s);
      if (std::fabs(gap - mid) < best) {
        best = std::fabs(gap - mid);
        point = gap;
      }
    }
  }
  const size_t at = std::min(ToSample(point, w.sample_rate_hz), w.samples.size());
  const size_t pause = long_pause ? ToSample(pause_s, w.sample_rate_hz) : 0;

  Edit out;
  out.transcript = transcript;
  out.audio.sample_rate_hz = w.sample_rate_hz;
  auto& s = out.audio.samples;
  s.reserve(w.samples.size() + filler.samples.size() + 2 * pause);
  s.insert(s.end(), w.samples.begin(), w.samples.begin() + at);
  s.insert(s.end(), pause, 0.0f);
  s.insert(s.end(), filler.samples.begin(), filler.samples.end());
  s.insert(s.end(), pause, 0.0f);
  s.insert(s.end(), w.samples.begin() + at, w.samples.end());

  const double shift =
      static_cast<double>(filler.samples.size() + 2 * pause) / w.sample_rate_hz;
  const double at_s = static_cast<double>(at) / w.sample_rate_hz;
  std::vector<WordAlignment> shifted = words;
  for (auto& a : shifted) {
    if (a.start_s >= at_s) {
      a.start_s += shift;
      a.end_s += shift;
    }
  }
  out.alignments = std::move(shifted);
  return out;
}

const std::set<std::string>& DefaultStopset() {
  static const std::set<std::string> stop = {"a", "the", "an", "so", "like", "and"};
  return stop;
}

Edit DropWords(const Waveform& w, const std::vector<std::string>& transcript,
               const std::optional<std::vector<WordAlignment>>& alignments,
               double p, Rng* rng, const std::set<std::string>& stopset) {
  const auto& words = RequireAlignments(transcript, alignments, "word dropping");
  std::vector<bool> removed(words.size(), false);
  std::vector<Cut> cuts;
  for (size_t i = 0; i < words.size(); ++i) {
    if (!stopset.count(Lower(transcript[i]))) continue;
    // Draw for every stopword so the random stream does not depend on p.
    const bool drop = rng->Uniform() < p;
    if (!drop) continue;
    removed[i] = true;
    cuts.push_back({ToSample(words[i].start_s, w.sample_rate_hz),
                    ToSample(words[i].end_s, w.sample_rate_hz)});
  }
  return Excise(w, cuts, transcript, words, removed);
}

std::string ApplyLetterRules(const std::string& word, const std::string& next_word,
                             const std::set<LetterRule>& rules,
                             std::vector<size_t>* dropped) {
  static const std::set<LetterRule> kAll(AllLetterRules().begin(),
                                          AllLetterRules().end());
  const std::set<LetterRule>& active = rules.empty() ? kAll : rules;
  // Surviving letters with their original indices.
  std::vector<std::pair<char, size_t>> letters;
  for (size_t i = 0; i < word.size(); ++i) letters.emplace_back(word[i], i);
  const bool next_consonant = !next_word.empty() && IsConsonant(next_word[0]);

  auto lower_at = [&](size_t i) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(letters[i].first)));
  };

  // Each rule runs to a fixed point so that reapplying it changes nothing.
  bool changed = true;
  while (changed) {
    changed = false;
    const size_t n = letters.size();
    std::optional<size_t> drop;
    if (active.count(LetterRule::kHVowel) && n >= 2 && lower_at(0) == 'h' &&
        IsVowel(letters[1].first)) {
      drop = 0;
    } else if (active.count(LetterRule::kVowelNdConsonant) && next_consonant && n >= 3 &&
               IsVowel(letters[n - 3].first) && lower_at(n - 2) == 'n' &&
               lower_at(n - 1) == 'd') {
      drop = n - 1;
    } else if (active.count(LetterRule::kConsonantTConsonant) && next_consonant &&
               n >= 2 && IsConsonant(letters[n - 2].first) && lower_at(n - 1) == 't') {
      drop = n - 1;
    } else if (active.count(LetterRule::kIngToIn) && n >= 4 && lower_at(n - 3) == 'i' &&
               lower_at(n - 2) == 'n' && lower_at(n - 1) == 'g') {
      drop = n - 1;
    } else if (active.count(LetterRule::kVowelRConsonant)) {
      for (size_t i = 1; i + 1 < n; ++i) {
        if (lower_at(i) == 'r' && IsVowel(letters[i - 1].first) &&
            IsConsonant(letters[i + 1].first)) {
          drop = i;
          break;
        }
      }
    }
    if (drop) {
      if (dropped) dropped->push_back(letters[*drop].second);
      letters.erase(letters.begin() + static_cast<long>(*drop));
      changed = true;
    }
  }
  std::string out;
  for (const auto& [c, idx] : letters) out.push_back(c);
  return out;
}

Edit DropLetters(const Waveform& w, const std::vector<std::string>& transcript,
                 const std::optional<std::vector<WordAlignment>>& alignments,
                 const std::set<LetterRule>& rules, double p, Rng* rng) {
  const auto& words = RequireAlignments(transcript, alignments, "letter dropping");
  std::vector<Cut> cuts;
  std::vector<std::string> surface = transcript;
  for (size_t i = 0; i < words.size(); ++i) {
    const std::string next = i + 1 < words.size() ? transcript[i + 1] : "";
    std::vector<size_t> dropped;
    const std::string changed = ApplyLetterRules(transcript[i], next, rules, &dropped);
    if (dropped.empty()) continue;
    if (!(rng->Uniform() < p)) continue;
    surface[i] = changed;
    const size_t b = ToSample(words[i].start_s, w.sample_rate_hz);
    const size_t e = ToSample(words[i].end_s, w.sample_rate_hz);
    const size_t len = transcript[i].size();
    for (size_t idx : dropped) {
      cuts.push_back({b + (e - b) * idx / len, b + (e - b) * (idx + 1) / len});
    }
  }
  Edit out = Excise(w, cuts, surface, words, std::vector<bool>(words.size(), false));
  for (size_t i = 0; i < out.alignments->size(); ++i) {
    (*out.alignments)[i].word = surface[i];
  }
  return out;
}

Waveform AddVocalBurst(const Waveform& w, const Waveform& burst, double snr_db,
                       double position_s) {
  if (burst.sample_rate_hz != w.sample_rate_hz) {
    throw DomainError("burst sample rate differs from the utterance");
  }
  if (std::isinf(snr_db) && snr_db > 0) return w;
  if (burst.samples.empty()) return w;
  const size_t start = ToSample(position_s, w.sample_rate_hz);
  if (start >= w.samples.size()) return w;
  const size_t len = std::min(burst.samples.size(), w.samples.size() - start);
  const std::span<const float> window(w.samples.data() + start, len);
  const std::span<const float> clip(burst.samples.data(), len);
  double ps = dsp::SignalPower(window);
  if (ps == 0.0) ps = dsp::SignalPower(w);
  const double pb = dsp::SignalPower(clip);
  if (pb == 0.0 || ps == 0.0) return w;
  const double gain = std::sqrt(ps / (pb * std::pow(10.0, snr_db / 10.0)));
  Waveform out = w;
  for (size_t i = 0; i < len; ++i) {
    out.samples[start + i] = static_cast<float>(w.samples[start + i] + gain * burst.samples[i]);
  }
  dsp::PeakNormalize(&out);
  return out;
}

double PitchRatio(int steps, double semitones_per_step) {
  return std::pow(2.0, steps * semitones_per_step / 12.0);
}

Waveform PitchShift(const Waveform& w, int steps, double semitones_per_step) {
  const double ratio = PitchRatio(steps, semitones_per_step);
  if (steps == 0 || ratio == 1.0) return w;
  Waveform fast = dsp::Resample(w, ratio, dsp::Interpolation::kSinc);
  Waveform out = dsp::TimeStretch(
      fast, static_cast<double>(w.samples.size()) / std::max<size_t>(1, fast.samples.size()));
  out.samples.resize(w.samples.size(), 0.0f);
  return out;
}

namespace {

// Schroeder network on a dry signal; returns the wet path only.
std::vector<double> SchroederWet(const std::vector<double>& x, const RoomParams& room,
                                 int sample_rate) {
  const size_t n = x.size();
  const double feedback = 0.7 + 0.28 * room.room_size;
  std::vector<double> comb_sum(n, 0.0);
  for (double delay_ms : room.delays_ms) {
    const size_t d = std::max<size_t>(1, ToSample(delay_ms / 1000.0, sample_rate));
    std::vector<double> y(n, 0.0);
    for (size_t i = d; i < n; ++i) y[i] = x[i - d] + feedback * y[i - d];
    for (size_t i = 0; i < n; ++i) comb_sum[i] += y[i] / room.delays_ms.size();
  }
  constexpr double kAllpassGain = 0.7;
  std::vector<double> cur = std::move(comb_sum);
  for (double delay_ms : {5.0, 1.7}) {
    const size_t d = std::max<size_t>(1, ToSample(delay_ms / 1000.0, sample_rate));
    std::vector<double> y(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
      const double delayed_in = i >= d ? cur[i - d] : 0.0;
      const double delayed_out = i >= d ? y[i - d] : 0.0;
      y[i] = -kAllpassGain * cur[i] + delayed_in + kAllpassGain * delayed_out;
    }
    cur = std::move(y);
  }
  return cur;
}

double WetImpulseEnergy(const RoomParams& room, int sample_rate) {
  const double feedback = 0.7 + 0.28 * room.room_size;
  const double max_delay = *std::max_element(room.delays_ms.begin(), room.delays_ms.end());
  // Long enough for the slowest comb to decay by 1e-8 in amplitude.
  const double periods = std::ceil(std::log(1e-8) / std::log(feedback));
  const size_t len = ToSample((periods + 2) * max_delay / 1000.0 + 0.05, sample_rate);
  std::vector<double> impulse(len, 0.0);
  impulse[0] = 1.0;
  double e = 0.0;
  for (double v : SchroederWet(impulse, room, sample_rate)) e += v * v;
  return e;
}

}  // namespace

Waveform Reverb(const Waveform& w, const RoomParams& room) {
  return Reverb(w, room, true);
}

Waveform Reverb(const Waveform& w, const RoomParams& room, bool normalize_peak) {
  if (!(room.wet_ratio >= 0.0 && room.wet_ratio <= 1.0) ||
      !(room.room_size >= 0.0 && room.room_size <= 1.0) || room.delays_ms.empty()) {
    throw DomainError("reverb parameters out of range");
  }
  if (room.wet_ratio == 0.0 || w.samples.empty()) return w;
  std::vector<double> x(w.samples.begin(), w.samples.end());
  const std::vector<double> wet = SchroederWet(x, room, w.sample_rate_hz);
  const double scale = room.wet_ratio / std::sqrt(WetImpulseEnergy(room, w.sample_rate_hz));
  Waveform out = w;
  for (size_t i = 0; i < x.size(); ++i) {
    out.samples[i] = static_cast<float>(x[i] + scale * wet[i]);
  }
  if (normalize_peak) dsp::PeakNormalize(&out);
  return out;
}

AssetLoader CachingWavLoader(const std::string& base_dir) {
  auto cache = std::make_shared<std::unordered_map<std::string, Waveform>>();
  auto mu = std::make_shared<std::mutex>();
  return [cache, mu, base_dir](const std::string& path) -> Waveform {
    const std::string full = corpus::ResolvePath(base_dir, path);
    std::lock_guard<std::mutex> lock(*mu);
    auto it = cache->find(full);
    if (it == cache->end()) it = cache->emplace(full, dsp::ReadWav(full)).first;
    return it->second;
  };
}

uint64_t SampleSeed(uint64_t global_seed, const std::string& utterance_id,
                    const std::string& spec_hash) {
  return DeriveSeed(global_seed, utterance_id + "/" + spec_hash);
}

AugmentResult Apply(const AugmentInput& input, const NoiseSpec& spec,
                    uint64_t global_seed, const AssetLoader& loader,
                    const PerceptionTable& table) {
  ValidateSpec(spec);
  AugmentResult res;
  res.spec_hash = SpecHash(spec);
  res.seed = SampleSeed(global_seed, input.id, res.spec_hash);
  res.perception = table.Classify(spec);
  Rng rng(res.seed);

  Edit& e = res.edit;
  e.transcript = input.transcript;
  e.alignments = input.alignments;
  const Waveform& w = input.audio;

  auto load = [&]() {
    Waveform asset = loader(spec.source_asset);
    if (asset.sample_rate_hz != w.sample_rate_hz) {
      throw DomainError("asset " + spec.source_asset + " has a different sample rate");
    }
    return asset;
  };

  switch (spec.category) {
    case NoiseCategory::kNatEnv:
    case NoiseCategory::kHumEnv:
    case NoiseCategory::kIntEnv: {
      EnvResult r = AddEnv(w, load(), spec.position, spec.snr_db);
      e.audio = std::move(r.audio);
      res.measured_snr_db = r.measured_snr_db;
      break;
    }
    case NoiseCategory::kSpeedUtt:
      e.audio = SpeedUtt(w, spec.speed_factor);
      e.alignments.reset();
      break;
    case NoiseCategory::kSpeedSeg: {
      const double dur = w.duration_s();
      std::pair<double, double> seg;
      if (spec.segment_s) {
        seg = *spec.segment_s;
      } else {
        const double len = spec.max_segment_fraction * dur;
        const double start = rng.Uniform(0.0, std::max(0.0, dur - len));
        seg = {start, start + len};
      }
      e.audio = SpeedSeg(w, spec.speed_factor, seg.first, seg.second,
                         spec.max_segment_fraction);
      e.alignments.reset();
      break;
    }
    case NoiseCategory::kFadeIn:
      e.audio = Fade(w, FadeDirection::kIn, spec.fade_rate_pct);
      break;
    case NoiseCategory::kFadeOut:
      e.audio = Fade(w, FadeDirection::kOut, spec.fade_rate_pct);
      break;
    case NoiseCategory::kFillerShort:
    case NoiseCategory::kFillerLong:
      e = InsertFiller(w, input.transcript, input.alignments, load(),
                       spec.category == NoiseCategory::kFillerLong, spec.pause_s);
      break;
    case NoiseCategory::kDropWord:
      e = DropWords(w, input.transcript, input.alignments, spec.drop_probability, &rng);
      break;
    case NoiseCategory::kDropLetters:
      e = DropLetters(w, input.transcript, input.alignments, spec.letter_rules,
                      spec.drop_probability, &rng);
      break;
    case NoiseCategory::kLaugh:
    case NoiseCategory::kCry:
      e.audio = AddVocalBurst(w, load(), spec.snr_db, spec.burst_position_s);
      break;
    case NoiseCategory::kPitchUp:
      e.audio = PitchShift(w, spec.pitch_steps, spec.semitones_per_step);
      break;
    case NoiseCategory::kPitchDown:
      e.audio = PitchShift(w, -spec.pitch_steps, spec.semitones_per_step);
      break;
    case NoiseCategory::kReverb:
      e.audio = Reverb(w, spec.room);
      break;
  }
  return res;
}

}  // namespace augment
}  // namespace emoeval
