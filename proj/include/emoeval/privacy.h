// include/emoeval/privacy.h

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

#ifndef EMOEVAL_PRIVACY_H_
#define EMOEVAL_PRIVACY_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "emoeval/nn.h"
#include "json.hpp"

namespace emoeval {
namespace privacy {

using nn::Matrix;

// Rows of `vectors` are samples; every label list has one entry per row.
struct RepresentationSet {
  Matrix vectors;
  std::map<std::string, std::vector<int>> labels;
  std::string provenance;
};

void ValidateRepresentationSet(const RepresentationSet& r);
RepresentationSet Subset(const RepresentationSet& r, const std::vector<size_t>& rows);

// Binary matrix at `path` ("REP1", uint32 rows, uint32 cols, float64
// little-endian) plus a JSON sidecar at `path + ".labels.json"`.
void SaveRepresentations(const std::string& path, const RepresentationSet& r);
RepresentationSet LoadRepresentations(const std::string& path);

struct AttackReport {
  std::string attribute;
  double attacker_uar = 0.0;
  double sir = 0.0;  // 1 - attacker_uar, clamped to [0, 0.5]
  std::vector<double> recalls;
  int attacker_depth = 0;
  int attacker_width = 0;
};

nlohmann::ordered_json ReportToJson(const AttackReport& r);

double SirFromUar(double uar);

// UAR of the jointly trained adversary head on held-out data.
double Leakage(const nn::ModelGraph& model, const Matrix& x, const std::vector<int>& labels);

struct AttackerConfig {
  std::vector<int> depths = {2, 3, 4};
  std::vector<int> widths = {32, 64};
  nn::TrainConfig train;
  double validation_fraction = 0.2;
  uint64_t seed = 0;
};

void ValidateAttackerConfig(const AttackerConfig& cfg);

struct TrainedAttacker {
  nn::ModelGraph graph;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 1 / std, 0 for constant dimensions
  double validation_uar = 0.0;
  int depth = 0;
  int width = 0;
};

// Grid search over dense stacks, selected on validation UAR. Inputs are
// z-normalized with training statistics.
TrainedAttacker FitAttacker(const Matrix& train_x, const std::vector<int>& train_y,
                            const Matrix& val_x, const std::vector<int>& val_y, int n_classes,
                            const AttackerConfig& cfg);
std::vector<int> AttackerPredict(const TrainedAttacker& a, const Matrix& x);

// Trains on `known` (the attacker's own labeled data, split into train and
// validation) and scores the attacker on `target`.
AttackReport AttackRepresentations(const RepresentationSet& known,
                                   const RepresentationSet& target,
                                   const std::string& attribute, const AttackerConfig& cfg);

using EmbedFn = std::function<Matrix(const Matrix&)>;

EmbedFn GraphEmbedder(const nn::ModelGraph& g);

// Embeds the protected set d1 and the attacker's set d2 with the main model,
// trains the attacker on d2 and evaluates it on d1.
AttackReport SirProtocol(const EmbedFn& embed, const RepresentationSet& d1,
                         const RepresentationSet& d2, const std::string& attribute,
                         const AttackerConfig& cfg);

// Speaker-independent folds: sorted speakers assigned round robin.
std::vector<std::vector<size_t>> SpeakerFolds(const std::vector<int>& speakers, int k = 5);

// Builds a main model from its training data and returns its embedder.
using Trainer = std::function<EmbedFn(const RepresentationSet& train)>;

struct MembershipConfig {
  AttackerConfig attacker;
  double selected_speaker_fraction = 0.5;
  double added_sample_fraction = 0.5;
  uint64_t seed = 0;
};

struct MembershipReport {
  double uar = 0.0;
  std::vector<int> selected_fold4;
  std::vector<int> selected_fold5;
  size_t training_samples = 0;
  int attacker_depth = 0;
  int attacker_width = 0;
};

nlohmann::ordered_json MembershipToJson(const MembershipReport& r);

// `corpus` needs a "speaker" label list and may carry "gender". Folds 1-3
// train the main model, and selected speakers of folds 4 and 5 contribute part
// of their samples. The attacker separates training speakers from the
// excluded fold 4 speakers and is scored on fold 5 speakers.
MembershipReport MembershipProtocol(const Trainer& trainer, const RepresentationSet& corpus,
                                    const std::vector<std::vector<size_t>>& folds,
                                    const MembershipConfig& cfg);

}  // namespace privacy
}  // namespace emoeval

#endif  // EMOEVAL_PRIVACY_H_
