// include/emoeval/hcm.h

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

#ifndef EMOEVAL_HCM_H_
#define EMOEVAL_HCM_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emoeval {
namespace hcm {

struct WordEntry {
  std::string word;
  std::optional<std::string> class_label;
  double weight = 1.0;
};

struct Wordlist {
  std::vector<WordEntry> entries;
};

// Throws DomainError on non-finite weights or a repeated (word, class) pair.
void ValidateWordlist(const Wordlist& list);

struct SaliencyToken {
  std::string word;
  double saliency = 0.0;
};

struct SaliencyRecord {
  std::string sample_id;
  std::vector<SaliencyToken> tokens;
  std::optional<std::string> predicted;  // needed by the pairwise mode only
};

// Throws DomainError on non-finite saliency or a word repeated after case folding.
void ValidateRecord(const SaliencyRecord& rec);

std::string CaseFold(std::string_view s);

inline constexpr double kSaliencyThreshold = 0.05;

enum class Polarity { kPositive, kNegative, kNegligible };

// Strict inequalities: |lambda| == 0.05 is negligible.
Polarity Classify(double saliency);

struct MatchedWord {
  std::string word;  // case-folded
  double saliency = 0.0;
  double weight = 1.0;
};

// Sample words that also appear in the wordlist, in sample order. When a
// word is listed under several classes with different weights the lookup
// is ambiguous and a ConfigError is thrown.
std::vector<MatchedWord> Intersect(const SaliencyRecord& s, const Wordlist& list);

enum class Normalization { kPerWord, kUnnormalized };

// Mean of |w| * |lambda| over the intersection; 0 when it is empty.
double GzSample(const SaliencyRecord& s, const Wordlist& list,
                Normalization norm = Normalization::kPerWord);

// Mean of |w| * (1 - |lambda|) over the intersection; 1 when it is empty
// (0 in the unnormalized mode, where it is a plain sum).
double SirSample(const SaliencyRecord& s, const Wordlist& list,
                 Normalization norm = Normalization::kPerWord);

enum class PairwiseVariant { kSigned, kAbsolute };

// Rewards positive words of `predicted_class` and negative words outside it,
// penalizes the two mismatched sets. Words outside the class list carry
// weight 1. Every wordlist entry must have a class label.
double PairwiseSample(const SaliencyRecord& s, const Wordlist& list,
                      const std::string& predicted_class,
                      PairwiseVariant variant = PairwiseVariant::kSigned);

enum class ScoreKind { kGz, kSir };
enum class ScoreMode { kCombined, kPairwise };

std::string ScoreKindName(ScoreKind k);
std::string ScoreModeName(ScoreMode m);

struct ScoreOptions {
  Normalization normalization = Normalization::kPerWord;
  PairwiseVariant pairwise_variant = PairwiseVariant::kSigned;
};

// Per-sample score for one record. The pairwise mode uses rec.predicted and
// is defined for the gz kind only.
double SampleScore(const SaliencyRecord& rec, const Wordlist& list, ScoreKind kind,
                   ScoreMode mode, const ScoreOptions& opts = {});

struct HcmScore {
  ScoreKind kind = ScoreKind::kGz;
  ScoreMode mode = ScoreMode::kCombined;
  bool dataset_level = true;
  double value = 0.0;
};

double Mean(std::span<const double> values);

HcmScore DatasetScore(const std::vector<SaliencyRecord>& samples, const Wordlist& list,
                      ScoreKind kind, ScoreMode mode, const ScoreOptions& opts = {});

struct RelativeResult {
  double value = 0.0;
  int used = 0;
  int skipped = 0;  // samples whose original score is zero
};

// Mean of (new - orig) / orig over samples paired by id.
RelativeResult RelativeImprovement(const std::map<std::string, double>& new_scores,
                                   const std::map<std::string, double>& orig_scores);

// Tertile split of a valence lexicon into low / med / high, ties kept in
// input order.
Wordlist BinLexiconValence(const std::vector<std::pair<std::string, double>>& raw);

// Tab-separated: word, optional class, optional weight. Blank lines and
// lines starting with '#' are skipped.
Wordlist ReadWordlist(const std::string& path);
void WriteWordlist(const std::string& path, const Wordlist& list);

// One JSON object per line: sample_id, word, saliency, optional predicted.
// Records keep first-appearance order.
std::vector<SaliencyRecord> ReadSaliency(const std::string& path);
void WriteSaliency(const std::string& path, const std::vector<SaliencyRecord>& records);

}  // namespace hcm
}  // namespace emoeval

#endif  // EMOEVAL_HCM_H_
