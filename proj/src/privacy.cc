// src/privacy.cc

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

#include "emoeval/privacy.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include "emoeval/error.h"
#include "emoeval/evalstats.h"
#include "emoeval/hash.h"
#include "emoeval/rng.h"

namespace emoeval {
namespace privacy {

namespace {

const std::vector<int>& RequireLabels(const RepresentationSet& r, const std::string& attr,
                                      const char* what) {
  auto it = r.labels.find(attr);
  if (it == r.labels.end()) {
    throw ConfigError(std::string(what) + ": no '" + attr + "' labels");
  }
  if (static_cast<Eigen::Index>(it->second.size()) != r.vectors.rows()) {
    throw ConfigError(std::string(what) + ": '" + attr + "' labels do not cover every row");
  }
  for (int v : it->second) {
    if (v < 0) throw ConfigError(std::string(what) + ": missing '" + attr + "' label");
  }
  return it->second;
}

int MaxLabel(const std::vector<int>& v) {
  return v.empty() ? -1 : *std::max_element(v.begin(), v.end());
}

Matrix Rows(const Matrix& m, const std::vector<size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

template <typename T>
std::vector<T> Pick(const std::vector<T>& v, const std::vector<size_t>& rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (size_t r : rows) out.push_back(v[r]);
  return out;
}

Matrix Normalize(const Matrix& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& scale) {
  Matrix out = x.rowwise() - mean.transpose();
  return out.array().rowwise() * scale.transpose().array();
}

std::vector<double> BalancedWeights(const std::vector<int>& y, int n_classes) {
  std::vector<double> counts(n_classes, 0.0);
  for (int v : y) counts[v] += 1.0;
  std::vector<double> w(n_classes, 1.0);
  for (int c = 0; c < n_classes; ++c) {
    if (counts[c] > 0) w[c] = static_cast<double>(y.size()) / (n_classes * counts[c]);
  }
  return w;
}

}  // namespace

void ValidateRepresentationSet(const RepresentationSet& r) {
  if (!r.vectors.allFinite()) throw DomainError("representations: non-finite value");
  for (const auto& [name, v] : r.labels) {
    if (static_cast<Eigen::Index>(v.size()) != r.vectors.rows()) {
      throw DomainError("representations: '" + name + "' has " + std::to_string(v.size()) +
                        " labels for " + std::to_string(r.vectors.rows()) + " rows");
    }
  }
}

RepresentationSet Subset(const RepresentationSet& r, const std::vector<size_t>& rows) {
  RepresentationSet out;
  out.vectors = Rows(r.vectors, rows);
  for (const auto& [name, v] : r.labels) out.labels[name] = Pick(v, rows);
  out.provenance = r.provenance;
  return out;
}

static_assert(std::endian::native == std::endian::little,
              "representation I/O assumes a little-endian host");

void SaveRepresentations(const std::string& path, const RepresentationSet& r) {
  ValidateRepresentationSet(r);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write representations: " + path);
  os.write("REP1", 4);
  const uint32_t rows = static_cast<uint32_t>(r.vectors.rows());
  const uint32_t cols = static_cast<uint32_t>(r.vectors.cols());
  os.write(reinterpret_cast<const char*>(&rows), 4);
  os.write(reinterpret_cast<const char*>(&cols), 4);
  for (uint32_t i = 0; i < rows; ++i) {
    for (uint32_t j = 0; j < cols; ++j) {
      const double v = r.vectors(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  }
  if (!os) throw IoError("failed writing representations: " + path);
  nlohmann::ordered_json side;
  side["provenance"] = r.provenance;
  side["labels"] = nlohmann::ordered_json::object();
  for (const auto& [name, v] : r.labels) side["labels"][name] = v;
  std::ofstream ls(path + ".labels.json");
  if (!ls) throw IoError("cannot write label sidecar: " + path + ".labels.json");
  ls << side.dump(2) << '\n';
}

RepresentationSet LoadRepresentations(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open representations: " + path);
  char magic[4];
  uint32_t rows = 0, cols = 0;
  if (!is.read(magic, 4) || std::memcmp(magic, "REP1", 4) != 0) {
    throw IoError("not a representation file: " + path);
  }
  if (!is.read(reinterpret_cast<char*>(&rows), 4) || !is.read(reinterpret_cast<char*>(&cols), 4)) {
    throw IoError("truncated representation file: " + path);
  }
  RepresentationSet r;
  r.vectors.resize(rows, cols);
  for (uint32_t i = 0; i < rows; ++i) {
    for (uint32_t j = 0; j < cols; ++j) {
      double v;
      if (!is.read(reinterpret_cast<char*>(&v), sizeof(double))) {
        throw IoError("truncated representation file: " + path);
      }
      r.vectors(i, j) = v;
    }
  }
  const std::string side_path = path + ".labels.json";
  std::ifstream ls(side_path);
  if (!ls) throw IoError("cannot open label sidecar: " + side_path);
  try {
    const auto side = nlohmann::json::parse(ls);
    r.provenance = side.value("provenance", "");
    for (const auto& [name, v] : side.at("labels").items()) {
      r.labels[name] = v.get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(side_path + ": " + e.what());
  }
  ValidateRepresentationSet(r);
  return r;
}

nlohmann::ordered_json ReportToJson(const AttackReport& r) {
  nlohmann::ordered_json j;
  j["attribute"] = r.attribute;
  j["attacker_uar"] = r.attacker_uar;
  j["sir"] = r.sir;
  nlohmann::ordered_json rec = nlohmann::ordered_json::array();
  for (double v : r.recalls) {
    rec.push_back(std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v));
  }
  j["recalls"] = rec;
  j["attacker"] = {{"depth", r.attacker_depth}, {"width", r.attacker_width}};
  return j;
}

double SirFromUar(double uar) { return std::clamp(1.0 - uar, 0.0, 0.5); }

double Leakage(const nn::ModelGraph& model, const Matrix& x, const std::vector<int>& labels) {
  if (!model.has_adversary()) {
    throw ConfigError("leakage: the model has no jointly trained attribute head");
  }
  const auto preds = model.PredictAdversary(x);
  return evalstats::Uar(preds, labels, model.spec().adversary->n_classes).value;
}

void ValidateAttackerConfig(const AttackerConfig& cfg) {
  if (cfg.depths.empty() || cfg.widths.empty()) throw ConfigError("attacker: empty grid");
  for (int d : cfg.depths) {
    if (d < 1) throw ConfigError("attacker: depth must be >= 1");
  }
  for (int w : cfg.widths) {
    if (w < 1) throw ConfigError("attacker: width must be >= 1");
  }
  if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0)) {
    throw ConfigError("attacker: validation_fraction must be in (0, 1)");
  }
  nn::ValidateTrainConfig(cfg.train);
}

TrainedAttacker FitAttacker(const Matrix& train_x, const std::vector<int>& train_y,
                            const Matrix& val_x, const std::vector<int>& val_y, int n_classes,
                            const AttackerConfig& cfg) {
  ValidateAttackerConfig(cfg);
  if (train_x.rows() < 2) throw ConfigError("attacker: fewer than two training rows");
  if (val_x.rows() < 1) throw ConfigError("attacker: empty validation set");
  TrainedAttacker best;
  best.mean = train_x.colwise().mean().transpose();
  const Eigen::VectorXd var =
      (train_x.rowwise() - best.mean.transpose()).array().square().colwise().mean().transpose();
  best.scale = Eigen::VectorXd::Zero(var.size());
  for (Eigen::Index i = 0; i < var.size(); ++i) {
    if (var(i) > 0.0) best.scale(i) = 1.0 / std::sqrt(var(i));
  }
  nn::Dataset tr{Normalize(train_x, best.mean, best.scale), train_y, {}};
  nn::Dataset va{Normalize(val_x, best.mean, best.scale), val_y, {}};

  nn::TrainConfig tc = cfg.train;
  tc.objective = nn::Objective{};
  tc.objective.class_weights = BalancedWeights(train_y, n_classes);
  best.validation_uar = -1.0;
  for (int depth : cfg.depths) {
    for (int width : cfg.widths) {
      nn::GraphSpec spec;
      spec.input_dim = static_cast<int>(train_x.cols());
      spec.trunk.assign(depth, width);
      spec.primary.n_classes = n_classes;
      const std::string key =
          "attacker/" + std::to_string(depth) + "x" + std::to_string(width);
      tc.seed = DeriveSeed(cfg.seed, key + "/train");
      nn::ModelGraph g(spec, DeriveSeed(cfg.seed, key + "/init"));
      nn::TrainResult tr_res = nn::Train(g, tr, va, tc);
      const double uar = nn::PrimaryUar(tr_res.graph, va);
      if (uar > best.validation_uar) {
        best.graph = tr_res.graph;
        best.validation_uar = uar;
        best.depth = depth;
        best.width = width;
      }
    }
  }
  return best;
}

std::vector<int> AttackerPredict(const TrainedAttacker& a, const Matrix& x) {
  return a.graph.PredictPrimary(Normalize(x, a.mean, a.scale));
}

AttackReport AttackRepresentations(const RepresentationSet& known,
                                   const RepresentationSet& target,
                                   const std::string& attribute, const AttackerConfig& cfg) {
  ValidateRepresentationSet(known);
  ValidateRepresentationSet(target);
  const auto& ky = RequireLabels(known, attribute, "attacker data");
  const auto& ty = RequireLabels(target, attribute, "protected data");
  if (known.vectors.cols() != target.vectors.cols()) {
    throw DomainError("attack: representation dimensions differ");
  }
  if (target.vectors.rows() == 0) throw DomainError("attack: empty protected set");
  const int n_classes = std::max(2, std::max(MaxLabel(ky), MaxLabel(ty)) + 1);

  // Per-class split so that validation sees every class with two or more rows.
  Rng rng(DeriveSeed(cfg.seed, "attacker/split"));
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < ky.size(); ++i) by_class[ky[i]].push_back(i);
  std::vector<size_t> tr_rows, va_rows;
  for (auto& [cls, rows] : by_class) {
    rng.Shuffle(&rows);
    size_t n_val = 0;
    if (rows.size() >= 2) {
      n_val = std::max<size_t>(1, static_cast<size_t>(std::lround(cfg.validation_fraction *
                                                                  rows.size())));
      n_val = std::min(n_val, rows.size() - 1);
    }
    va_rows.insert(va_rows.end(), rows.begin(), rows.begin() + n_val);
    tr_rows.insert(tr_rows.end(), rows.begin() + n_val, rows.end());
  }
  std::sort(tr_rows.begin(), tr_rows.end());
  std::sort(va_rows.begin(), va_rows.end());

  const TrainedAttacker att = FitAttacker(Rows(known.vectors, tr_rows), Pick(ky, tr_rows),
                                          Rows(known.vectors, va_rows), Pick(ky, va_rows),
                                          n_classes, cfg);
  const auto preds = AttackerPredict(att, target.vectors);
  const auto uar = evalstats::Uar(preds, ty, n_classes);
  AttackReport rep;
  rep.attribute = attribute;
  rep.attacker_uar = uar.value;
  rep.sir = SirFromUar(uar.value);
  rep.recalls = uar.recalls;
  rep.attacker_depth = att.depth;
  rep.attacker_width = att.width;
  return rep;
}

EmbedFn GraphEmbedder(const nn::ModelGraph& g) {
  return [g](const Matrix& x) { return g.Embed(x); };
}

AttackReport SirProtocol(const EmbedFn& embed, const RepresentationSet& d1,
                         const RepresentationSet& d2, const std::string& attribute,
                         const AttackerConfig& cfg) {
  RequireLabels(d2, attribute, "attacker data");
  RepresentationSet e1 = d1, e2 = d2;
  e1.vectors = embed(d1.vectors);  // phase 1
  e2.vectors = embed(d2.vectors);  // phase 2
  return AttackRepresentations(e2, e1, attribute, cfg);  // phases 3 and 4
}

std::vector<std::vector<size_t>> SpeakerFolds(const std::vector<int>& speakers, int k) {
  if (k < 2) throw ConfigError("speaker folds: k must be >= 2");
  std::set<int> uniq(speakers.begin(), speakers.end());
  if (static_cast<int>(uniq.size()) < k) {
    throw ConfigError("speaker folds: fewer speakers than folds");
  }
  std::map<int, int> fold_of;
  int j = 0;
  for (int s : uniq) fold_of[s] = j++ % k;
  std::vector<std::vector<size_t>> folds(k);
  for (size_t i = 0; i < speakers.size(); ++i) folds[fold_of[speakers[i]]].push_back(i);
  return folds;
}

nlohmann::ordered_json MembershipToJson(const MembershipReport& r) {
  nlohmann::ordered_json j;
  j["uar"] = r.uar;
  j["selected_fold4"] = r.selected_fold4;
  j["selected_fold5"] = r.selected_fold5;
  j["training_samples"] = r.training_samples;
  j["attacker"] = {{"depth", r.attacker_depth}, {"width", r.attacker_width}};
  return j;
}

namespace {

struct FoldSplit {
  std::vector<int> selected;      // sorted speaker ids
  std::vector<int> excluded;      // sorted speaker ids
  std::vector<size_t> added;      // rows that join the main training set
  std::vector<size_t> held_out;   // remaining rows of selected speakers
  std::vector<size_t> excluded_rows;
};

FoldSplit SplitFold(const std::vector<size_t>& rows, const std::vector<int>& speakers,
                    const std::vector<int>* gender, const MembershipConfig& cfg, Rng* rng) {
  std::map<int, std::vector<size_t>> by_speaker;
  for (size_t r : rows) by_speaker[speakers[r]].push_back(r);
  // Speakers grouped by gender (a single group without gender labels).
  std::map<int, std::vector<int>> groups;
  for (const auto& [spk, spk_rows] : by_speaker) {
    groups[gender ? (*gender)[spk_rows.front()] : 0].push_back(spk);
  }
  std::set<int> selected;
  for (auto& [g, spks] : groups) {
    rng->Shuffle(&spks);
    const size_t take = static_cast<size_t>(
        std::lround(cfg.selected_speaker_fraction * static_cast<double>(spks.size())));
    selected.insert(spks.begin(), spks.begin() + std::min(take, spks.size()));
  }
  FoldSplit out;
  for (auto& [spk, spk_rows] : by_speaker) {
    if (!selected.count(spk)) {
      out.excluded.push_back(spk);
      out.excluded_rows.insert(out.excluded_rows.end(), spk_rows.begin(), spk_rows.end());
      continue;
    }
    out.selected.push_back(spk);
    std::vector<size_t> shuffled = spk_rows;
    rng->Shuffle(&shuffled);
    const size_t add = static_cast<size_t>(
        std::lround(cfg.added_sample_fraction * static_cast<double>(shuffled.size())));
    out.added.insert(out.added.end(), shuffled.begin(), shuffled.begin() + add);
    out.held_out.insert(out.held_out.end(), shuffled.begin() + add, shuffled.end());
  }
  std::sort(out.added.begin(), out.added.end());
  std::sort(out.held_out.begin(), out.held_out.end());
  return out;
}

}  // namespace

MembershipReport MembershipProtocol(const Trainer& trainer, const RepresentationSet& corpus,
                                    const std::vector<std::vector<size_t>>& folds,
                                    const MembershipConfig& cfg) {
  ValidateRepresentationSet(corpus);
  const auto& speakers = RequireLabels(corpus, "speaker", "membership corpus");
  const std::vector<int>* gender = nullptr;
  if (corpus.labels.count("gender")) gender = &RequireLabels(corpus, "gender", "membership corpus");
  if (folds.size() != 5) throw ConfigError("membership: exactly five folds are required");
  std::map<int, size_t> fold_of_speaker;
  for (size_t f = 0; f < folds.size(); ++f) {
    for (size_t r : folds[f]) {
      if (r >= speakers.size()) throw ConfigError("membership: fold row out of range");
      auto [it, ins] = fold_of_speaker.emplace(speakers[r], f);
      if (!ins && it->second != f) {
        throw ConfigError("membership: speaker " + std::to_string(speakers[r]) +
                          " appears in more than one fold");
      }
    }
  }
  if (!(cfg.selected_speaker_fraction > 0.0 && cfg.selected_speaker_fraction < 1.0) ||
      !(cfg.added_sample_fraction > 0.0 && cfg.added_sample_fraction < 1.0)) {
    throw ConfigError("membership: fractions must be in (0, 1)");
  }

  Rng rng(DeriveSeed(cfg.seed, "membership/select"));
  const FoldSplit f4 = SplitFold(folds[3], speakers, gender, cfg, &rng);
  const FoldSplit f5 = SplitFold(folds[4], speakers, gender, cfg, &rng);

  std::vector<size_t> train_rows;
  for (int f = 0; f < 3; ++f) train_rows.insert(train_rows.end(), folds[f].begin(), folds[f].end());
  train_rows.insert(train_rows.end(), f4.added.begin(), f4.added.end());
  train_rows.insert(train_rows.end(), f5.added.begin(), f5.added.end());
  std::sort(train_rows.begin(), train_rows.end());

  // Yes: everything the main model saw plus the unseen rows of fold 4
  // members. No: fold 4 speakers left out of training.
  std::vector<size_t> yes_rows = train_rows;
  yes_rows.insert(yes_rows.end(), f4.held_out.begin(), f4.held_out.end());
  std::sort(yes_rows.begin(), yes_rows.end());
  std::set<int> yes_speakers, no_speakers(f4.excluded.begin(), f4.excluded.end());
  for (size_t r : yes_rows) yes_speakers.insert(speakers[r]);
  if (yes_speakers.size() < 2 || no_speakers.size() < 2) {
    throw ConfigError("membership: each side needs at least two speakers");
  }
  if (f5.selected.empty() || f5.excluded.empty()) {
    throw ConfigError("membership: fold 5 needs both included and excluded speakers");
  }

  const EmbedFn embed = trainer(Subset(corpus, train_rows));

  const int yes_val = f4.selected.empty() ? *yes_speakers.begin() : f4.selected.front();
  const int no_val = f4.excluded.front();
  std::vector<size_t> tr_rows, va_rows;
  std::vector<int> tr_y, va_y;
  for (size_t r : yes_rows) {
    if (speakers[r] == yes_val) {
      va_rows.push_back(r);
      va_y.push_back(1);
    } else {
      tr_rows.push_back(r);
      tr_y.push_back(1);
    }
  }
  for (size_t r : f4.excluded_rows) {
    if (speakers[r] == no_val) {
      va_rows.push_back(r);
      va_y.push_back(0);
    } else {
      tr_rows.push_back(r);
      tr_y.push_back(0);
    }
  }
  const TrainedAttacker att = FitAttacker(embed(Rows(corpus.vectors, tr_rows)), tr_y,
                                          embed(Rows(corpus.vectors, va_rows)), va_y, 2,
                                          cfg.attacker);

  std::vector<size_t> test_rows;
  std::vector<int> test_y;
  for (size_t r : f5.held_out) {
    test_rows.push_back(r);
    test_y.push_back(1);
  }
  for (size_t r : f5.excluded_rows) {
    test_rows.push_back(r);
    test_y.push_back(0);
  }
  if (f5.held_out.empty()) throw ConfigError("membership: fold 5 members have no held-out rows");
  const auto preds = AttackerPredict(att, embed(Rows(corpus.vectors, test_rows)));

  MembershipReport rep;
  rep.uar = evalstats::Uar(preds, test_y, 2).value;
  rep.selected_fold4 = f4.selected;
  rep.selected_fold5 = f5.selected;
  rep.training_samples = train_rows.size();
  rep.attacker_depth = att.depth;
  rep.attacker_width = att.width;
  return rep;
}

}  // namespace privacy
}  // namespace emoeval
