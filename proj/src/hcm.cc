// src/hcm.cc

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

#include "emoeval/hcm.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "emoeval/error.h"
#include "json.hpp"

namespace emoeval {
namespace hcm {

std::string CaseFold(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void ValidateWordlist(const Wordlist& list) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : list.entries) {
    if (e.word.empty()) throw DomainError("wordlist: empty word");
    if (!std::isfinite(e.weight)) throw DomainError("wordlist: non-finite weight for " + e.word);
    auto key = std::make_pair(CaseFold(e.word), e.class_label.value_or(""));
    if (!seen.insert(key).second) {
      throw DomainError("wordlist: duplicate entry for " + e.word);
    }
  }
}

void ValidateRecord(const SaliencyRecord& rec) {
  std::set<std::string> seen;
  for (const auto& t : rec.tokens) {
    if (!std::isfinite(t.saliency)) {
      throw DomainError("saliency: non-finite value in " + rec.sample_id);
    }
    if (!seen.insert(CaseFold(t.word)).second) {
      throw DomainError("saliency: word '" + t.word + "' repeated in " + rec.sample_id);
    }
  }
}

Polarity Classify(double saliency) {
  if (saliency > kSaliencyThreshold) return Polarity::kPositive;
  if (saliency < -kSaliencyThreshold) return Polarity::kNegative;
  return Polarity::kNegligible;
}

namespace {

std::map<std::string, double> WeightMap(const Wordlist& list) {
  std::map<std::string, double> weights;
  for (const auto& e : list.entries) {
    if (!std::isfinite(e.weight)) throw DomainError("wordlist: non-finite weight");
    const std::string w = CaseFold(e.word);
    auto [it, inserted] = weights.emplace(w, e.weight);
    if (!inserted && it->second != e.weight) {
      throw ConfigError("wordlist: conflicting weights for '" + e.word + "'");
    }
  }
  return weights;
}

}  // namespace

std::vector<MatchedWord> Intersect(const SaliencyRecord& s, const Wordlist& list) {
  ValidateRecord(s);
  const auto weights = WeightMap(list);
  std::vector<MatchedWord> out;
  for (const auto& t : s.tokens) {
    const std::string w = CaseFold(t.word);
    auto it = weights.find(w);
    if (it != weights.end()) out.push_back({w, t.saliency, it->second});
  }
  return out;
}

double GzSample(const SaliencyRecord& s, const Wordlist& list, Normalization norm) {
  const auto matched = Intersect(s, list);
  if (matched.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& m : matched) sum += std::fabs(m.weight) * std::fabs(m.saliency);
  return norm == Normalization::kPerWord ? sum / matched.size() : sum;
}

double SirSample(const SaliencyRecord& s, const Wordlist& list, Normalization norm) {
  const auto matched = Intersect(s, list);
  if (matched.empty()) return norm == Normalization::kPerWord ? 1.0 : 0.0;
  double sum = 0.0;
  for (const auto& m : matched) sum += std::fabs(m.weight) * (1.0 - std::fabs(m.saliency));
  return norm == Normalization::kPerWord ? sum / matched.size() : sum;
}

double PairwiseSample(const SaliencyRecord& s, const Wordlist& list,
                      const std::string& predicted_class, PairwiseVariant variant) {
  ValidateRecord(s);
  std::map<std::string, double> in_class;
  for (const auto& e : list.entries) {
    if (!e.class_label) {
      throw ConfigError("pairwise score needs a class label on every wordlist entry ('" +
                        e.word + "' has none)");
    }
    if (*e.class_label == predicted_class) in_class[CaseFold(e.word)] = e.weight;
  }
  double reward = 0.0, penalty = 0.0;
  for (const auto& t : s.tokens) {
    const Polarity pol = Classify(t.saliency);
    if (pol == Polarity::kNegligible) continue;
    auto it = in_class.find(CaseFold(t.word));
    const bool member = it != in_class.end();
    const double weight = member ? it->second : 1.0;
    const double lambda =
        variant == PairwiseVariant::kSigned ? t.saliency : std::fabs(t.saliency);
    const bool matched = (pol == Polarity::kPositive) == member;
    (matched ? reward : penalty) += weight * lambda;
  }
  return reward - penalty;
}

std::string ScoreKindName(ScoreKind k) { return k == ScoreKind::kGz ? "gz" : "sir"; }

std::string ScoreModeName(ScoreMode m) {
  return m == ScoreMode::kCombined ? "combined" : "pairwise";
}

double SampleScore(const SaliencyRecord& rec, const Wordlist& list, ScoreKind kind,
                   ScoreMode mode, const ScoreOptions& opts) {
  if (mode == ScoreMode::kPairwise) {
    if (kind != ScoreKind::kGz) throw ConfigError("pairwise mode is defined for gz only");
    if (!rec.predicted) {
      throw ConfigError("pairwise mode needs a predicted class for " + rec.sample_id);
    }
    return PairwiseSample(rec, list, *rec.predicted, opts.pairwise_variant);
  }
  return kind == ScoreKind::kGz ? GzSample(rec, list, opts.normalization)
                                : SirSample(rec, list, opts.normalization);
}

double Mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("mean of an empty set");
  return std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

HcmScore DatasetScore(const std::vector<SaliencyRecord>& samples, const Wordlist& list,
                      ScoreKind kind, ScoreMode mode, const ScoreOptions& opts) {
  if (samples.empty()) throw DomainError("dataset score: no samples");
  std::vector<double> per_sample;
  per_sample.reserve(samples.size());
  for (const auto& s : samples) per_sample.push_back(SampleScore(s, list, kind, mode, opts));
  HcmScore score;
  score.kind = kind;
  score.mode = mode;
  score.dataset_level = true;
  score.value = Mean(per_sample);
  return score;
}

RelativeResult RelativeImprovement(const std::map<std::string, double>& new_scores,
                                   const std::map<std::string, double>& orig_scores) {
  if (new_scores.size() != orig_scores.size()) {
    throw ConfigError("relative improvement: sample sets differ");
  }
  RelativeResult r;
  double sum = 0.0;
  for (const auto& [id, orig] : orig_scores) {
    auto it = new_scores.find(id);
    if (it == new_scores.end()) {
      throw ConfigError("relative improvement: no new score for " + id);
    }
    if (orig == 0.0) {
      ++r.skipped;
      continue;
    }
    sum += (it->second - orig) / orig;
    ++r.used;
  }
  if (r.used == 0) {
    throw UndefinedMetricError("relative improvement: every original score is zero");
  }
  r.value = sum / r.used;
  return r;
}

Wordlist BinLexiconValence(const std::vector<std::pair<std::string, double>>& raw) {
  if (raw.size() < 3) throw DomainError("lexicon binning needs at least three entries");
  std::vector<size_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return raw[a].second < raw[b].second; });
  static const char* kNames[] = {"low", "med", "high"};
  Wordlist out;
  out.entries.resize(raw.size());
  const size_t n = raw.size();
  for (size_t rank = 0; rank < n; ++rank) {
    const size_t idx = order[rank];
    if (!std::isfinite(raw[idx].second)) throw DomainError("lexicon: non-finite valence");
    out.entries[idx] = {raw[idx].first, std::string(kNames[rank * 3 / n]), 1.0};
  }
  return out;
}

Wordlist ReadWordlist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open wordlist: " + path);
  Wordlist list;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.empty() || cols[0].empty() || cols.size() > 3) {
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed wordlist line");
    }
    WordEntry e;
    e.word = cols[0];
    if (cols.size() >= 2 && !cols[1].empty()) e.class_label = cols[1];
    if (cols.size() == 3 && !cols[2].empty()) {
      try {
        size_t used = 0;
        e.weight = std::stod(cols[2], &used);
        if (used != cols[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(lineno) + ": bad weight '" + cols[2] + "'");
      }
    }
    list.entries.push_back(std::move(e));
  }
  ValidateWordlist(list);
  return list;
}

void WriteWordlist(const std::string& path, const Wordlist& list) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write wordlist: " + path);
  out.precision(17);
  for (const auto& e : list.entries) {
    out << e.word << '\t' << e.class_label.value_or("") << '\t' << e.weight << '\n';
  }
}

std::vector<SaliencyRecord> ReadSaliency(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open saliency file: " + path);
  std::vector<SaliencyRecord> records;
  std::map<std::string, size_t> index;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const std::string id = j.at("sample_id").get<std::string>();
      auto [it, inserted] = index.emplace(id, records.size());
      if (inserted) records.push_back({id, {}, std::nullopt});
      SaliencyRecord& rec = records[it->second];
      rec.tokens.push_back({j.at("word").get<std::string>(), j.at("saliency").get<double>()});
      if (j.contains("predicted") && !j["predicted"].is_null()) {
        const std::string p = j["predicted"].get<std::string>();
        if (rec.predicted && *rec.predicted != p) {
          throw IoError(where + ": conflicting predicted class for " + id);
        }
        rec.predicted = p;
      }
    } catch (const nlohmann::json::exception& e) {
      throw IoError(where + ": " + e.what());
    }
  }
  for (const auto& r : records) ValidateRecord(r);
  return records;
}

void WriteSaliency(const std::string& path, const std::vector<SaliencyRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write saliency file: " + path);
  for (const auto& r : records) {
    for (const auto& t : r.tokens) {
      nlohmann::ordered_json j;
      j["sample_id"] = r.sample_id;
      j["word"] = t.word;
      j["saliency"] = t.saliency;
      if (r.predicted) j["predicted"] = *r.predicted;
      out << j.dump() << '\n';
    }
  }
}

}  // namespace hcm
}  // namespace emoeval
