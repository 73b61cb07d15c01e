// src/corpus.cc

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

#include "emoeval/corpus.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "emoeval/error.h"
#include "json.hpp"

namespace emoeval {
namespace corpus {

namespace {

void CheckRange(double v, double lo, double hi, const char* what) {
  if (!(v >= lo && v <= hi)) {
    std::ostringstream ss;
    ss << what << " score " << v << " outside [" << lo << ", " << hi << "]";
    throw DomainError(ss.str());
  }
}

double Mean(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw DomainError(std::string("empty annotation list: ") + what);
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

void ValidateUtterance(const Utterance& utt) {
  if (!(utt.duration_s > 0.0)) {
    throw DomainError("utterance " + utt.id + ": duration must be positive");
  }
  if (!utt.word_alignments) return;
  double prev_end = 0.0;
  for (const auto& w : *utt.word_alignments) {
    if (w.start_s < prev_end || w.end_s < w.start_s || w.end_s > utt.duration_s) {
      throw DomainError("utterance " + utt.id + ": bad alignment for '" +
                        w.word + "'");
    }
    prev_end = w.end_s;
  }
}

const char* LabelClassName(LabelClass c) {
  switch (c) {
    case LabelClass::kLow: return "low";
    case LabelClass::kMid: return "mid";
    case LabelClass::kHigh: return "high";
  }
  return "?";
}

LabelClass BinMuse(double mean_score) {
  CheckRange(mean_score, 1.0, 9.0, "nine-point");
  if (mean_score <= 4.5) return LabelClass::kLow;
  if (mean_score <= 5.5) return LabelClass::kMid;
  return LabelClass::kHigh;
}

LabelClass BinIemocap(double mean_score) {
  CheckRange(mean_score, 1.0, 5.0, "five-point");
  if (mean_score <= 2.75) return LabelClass::kLow;
  if (mean_score <= 3.25) return LabelClass::kMid;
  return LabelClass::kHigh;
}

LabelClass BinStress(double adjusted_sum, double population_mean) {
  if (!std::isfinite(adjusted_sum) || !std::isfinite(population_mean)) {
    throw DomainError("stress score and mean must be finite");
  }
  // Boundaries are mean +/- 2, so the comparison runs on the difference.
  // Snapping it to 1e-9 makes decimal inputs such as 14.11 vs mean 16.11 land
  // exactly on the closed bound instead of one ulp to either side.
  const double diff = std::round((adjusted_sum - population_mean) * 1e9) / 1e9;
  if (diff <= -2.0) return LabelClass::kLow;
  if (diff <= 2.0) return LabelClass::kMid;
  return LabelClass::kHigh;
}

StressScore DeriveStress(const std::vector<int>& per_question,
                         double population_mean) {
  if (per_question.size() < 3) {
    throw DomainError("stress items must include item 3");
  }
  StressScore out;
  out.per_question = per_question;
  long sum = 0;
  for (size_t i = 0; i < per_question.size(); ++i) {
    sum += per_question[i] * (i == 2 ? 2 : 1);
  }
  out.adjusted_sum = static_cast<double>(sum);
  // All-zero items with mean 0 fall in (mean-2, mean+2]: mid, by the literal
  // intervals.
  out.label = BinStress(out.adjusted_sum, population_mean);
  return out;
}

MeanAnnotation AggregateAnnotations(const AnnotationSet& a) {
  if (a.scale_max != 5 && a.scale_max != 9) {
    throw DomainError("scale_max must be 5 or 9");
  }
  for (const auto* list : {&a.activation_raw, &a.valence_raw}) {
    for (double v : *list) CheckRange(v, 1.0, a.scale_max, "annotation");
  }
  return {Mean(a.activation_raw, "activation"), Mean(a.valence_raw, "valence")};
}

DurationFilterResult FilterDuration(const std::vector<Utterance>& entries,
                                    double min_s, double max_s) {
  DurationFilterResult out;
  for (const auto& e : entries) {
    if (e.duration_s >= min_s && e.duration_s <= max_s) out.kept.push_back(e);
  }
  if (!entries.empty()) {
    out.retained_fraction =
        static_cast<double>(out.kept.size()) / static_cast<double>(entries.size());
  }
  return out;
}

std::vector<Split> MakeFolds(const Manifest& manifest, int k, GroupKey key) {
  if (k < 3) {
    throw ConfigError("k-fold split needs k >= 3: with fewer folds the "
                      "training partition is empty");
  }
  auto group_of = [key](const Utterance& u) -> const std::string& {
    return key == GroupKey::kSpeaker ? u.speaker_id : u.session_id;
  };
  std::set<std::string> groups;
  for (const auto& u : manifest.entries) groups.insert(group_of(u));
  if (groups.size() < static_cast<size_t>(k)) {
    std::ostringstream ss;
    ss << "only " << groups.size() << " distinct groups for " << k << " folds";
    throw ConfigError(ss.str());
  }
  std::map<std::string, int> fold_of;
  int next = 0;
  for (const auto& g : groups) fold_of[g] = next++ % k;

  std::vector<Split> splits(k);
  for (int i = 0; i < k; ++i) {
    const int val_fold = (i + k - 1) % k;
    for (size_t j = 0; j < manifest.entries.size(); ++j) {
      const int f = fold_of[group_of(manifest.entries[j])];
      if (f == i) {
        splits[i].test.push_back(j);
      } else if (f == val_fold) {
        splits[i].validation.push_back(j);
      } else {
        splits[i].train.push_back(j);
      }
    }
  }
  return splits;
}

std::string ResolvePath(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

std::vector<WordAlignment> ReadAlignmentFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open alignment file: " + path);
  std::vector<WordAlignment> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    WordAlignment w;
    std::string start, end;
    if (!std::getline(ss, w.word, '\t') || !std::getline(ss, start, '\t') ||
        !std::getline(ss, end)) {
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": expected word<TAB>start<TAB>end");
    }
    w.start_s = std::stod(start);
    w.end_s = std::stod(end);
    out.push_back(std::move(w));
  }
  return out;
}

void WriteAlignmentFile(const std::vector<WordAlignment>& words,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write alignment file: " + path);
  out.precision(17);
  for (const auto& w : words) {
    out << w.word << '\t' << w.start_s << '\t' << w.end_s << '\n';
  }
}

std::vector<std::string> ReadTranscriptFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transcript file: " + path);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

Manifest LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  Manifest m;
  m.base_dir = std::filesystem::path(path).parent_path().string();
  std::string line;
  int lineno = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    Utterance u;
    try {
      u.id = rec.at("id").get<std::string>();
      u.speaker_id = rec.at("speaker").get<std::string>();
      u.session_id = rec.value("session", std::string());
      u.audio_path = rec.at("audio_path").get<std::string>();
      u.transcript_path = rec.value("transcript_path", std::string());
      u.alignment_path = rec.value("alignment_path", std::string());
      u.duration_s = rec.value("duration_s", 0.0);
      if (rec.contains("tags")) {
        u.tags = rec.at("tags").get<std::map<std::string, std::string>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!ids.insert(u.id).second) {
      throw IoError(path + ":" + std::to_string(lineno) + ": duplicate id " + u.id);
    }
    const std::string tpath = ResolvePath(m.base_dir, u.transcript_path);
    if (!tpath.empty() && std::filesystem::exists(tpath)) {
      u.transcript = ReadTranscriptFile(tpath);
    }
    const std::string apath = ResolvePath(m.base_dir, u.alignment_path);
    if (!apath.empty()) u.word_alignments = ReadAlignmentFile(apath);
    m.entries.push_back(std::move(u));
  }
  return m;
}

void SaveManifest(const Manifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  for (const auto& u : manifest.entries) {
    nlohmann::ordered_json rec;
    rec["id"] = u.id;
    rec["speaker"] = u.speaker_id;
    rec["session"] = u.session_id;
    rec["audio_path"] = u.audio_path;
    rec["transcript_path"] = u.transcript_path;
    if (!u.alignment_path.empty()) rec["alignment_path"] = u.alignment_path;
    if (u.duration_s > 0.0) rec["duration_s"] = u.duration_s;
    rec["tags"] = u.tags;
    out << rec.dump() << '\n';
  }
}

}  // namespace corpus
}  // namespace emoeval
