// include/emoeval/corpus.h

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

#ifndef EMOEVAL_CORPUS_H_
#define EMOEVAL_CORPUS_H_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace emoeval {
namespace corpus {

struct WordAlignment {
  std::string word;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct Utterance {
  std::string id;
  std::string speaker_id;
  std::string session_id;
  std::string audio_path;
  std::string transcript_path;
  std::string alignment_path;  // empty when absent
  double duration_s = 0.0;     // 0 until known
  std::vector<std::string> transcript;
  std::optional<std::vector<WordAlignment>> word_alignments;
  std::map<std::string, std::string> tags;
};

// Throws DomainError when duration is not positive or alignments overlap,
// run backwards or leave [0, duration_s].
void ValidateUtterance(const Utterance& utt);

enum class LabelClass { kLow, kMid, kHigh };

const char* LabelClassName(LabelClass c);

struct AnnotationSet {
  std::vector<double> activation_raw;
  std::vector<double> valence_raw;
  int scale_max = 9;
  std::optional<std::pair<double, double>> self_report;
};

// Nine-point scale: low [1, 4.5], mid (4.5, 5.5], high (5.5, 9].
LabelClass BinMuse(double mean_score);

// Five-point scale: low [1, 2.75], mid (2.75, 3.25], high (3.25, 5].
LabelClass BinIemocap(double mean_score);

struct StressScore {
  std::vector<int> per_question;
  double adjusted_sum = 0.0;
  LabelClass label = LabelClass::kMid;
};

// low (min, mean-2], mid (mean-2, mean+2], high (mean+2, max].
LabelClass BinStress(double adjusted_sum, double population_mean);

// Sums PSS items with item 3 (1-based) counted twice, then bins against the
// population mean.
StressScore DeriveStress(const std::vector<int>& per_question,
                         double population_mean);

struct MeanAnnotation {
  double activation = 0.0;
  double valence = 0.0;
};

MeanAnnotation AggregateAnnotations(const AnnotationSet& a);

struct DurationFilterResult {
  std::vector<Utterance> kept;
  double retained_fraction = 0.0;  // 0 for an empty input
};

DurationFilterResult FilterDuration(const std::vector<Utterance>& entries,
                                    double min_s = 3.0, double max_s = 35.0);

enum class GroupKey { kSpeaker, kSession };

struct Split {
  std::vector<size_t> train;  // indices into the manifest entries
  std::vector<size_t> validation;
  std::vector<size_t> test;
};

struct Manifest {
  std::vector<Utterance> entries;
  std::string base_dir;  // relative paths resolve against this
};

// Speaker-independent round-robin folds. Groups are sorted by key and dealt
// to folds cyclically; split i tests on fold i and validates on fold i-1.
std::vector<Split> MakeFolds(const Manifest& manifest, int k = 5,
                             GroupKey key = GroupKey::kSpeaker);

// Line-delimited JSON manifest: one object per line with fields id, speaker,
// session, audio_path, transcript_path, alignment_path (optional),
// duration_s (optional) and tags (object of strings). Transcripts and
// alignments are loaded when their files exist.
Manifest LoadManifest(const std::string& path);
void SaveManifest(const Manifest& manifest, const std::string& path);

// "word<TAB>start_s<TAB>end_s" per line.
std::vector<WordAlignment> ReadAlignmentFile(const std::string& path);
void WriteAlignmentFile(const std::vector<WordAlignment>& words,
                        const std::string& path);

std::vector<std::string> ReadTranscriptFile(const std::string& path);

std::string ResolvePath(const std::string& base_dir, const std::string& path);

}  // namespace corpus
}  // namespace emoeval

#endif  // EMOEVAL_CORPUS_H_
