// tests/synthetic.h

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

// Synthetic corpora shared by the privacy and acceptance tests.

#ifndef EMOEVAL_TESTS_SYNTHETIC_H_
#define EMOEVAL_TESTS_SYNTHETIC_H_

#include <vector>

#include "emoeval/nn.h"
#include "emoeval/privacy.h"
#include "emoeval/rng.h"

namespace testutil {

// Balanced binary primary label carried by dimensions 0-1, a binary confound
// label carried exactly by dimension 2, and three noise dimensions. The two
// labels are drawn independently.
inline emoeval::nn::Dataset ConfoundCorpus(int n, uint64_t seed) {
  emoeval::Rng rng(seed);
  emoeval::nn::Dataset d;
  d.x.resize(n, 6);
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    const int a = static_cast<int>(rng.UniformInt(2));
    const double sy = y == 1 ? 1.0 : -1.0;
    d.x(i, 0) = 1.5 * sy + 0.5 * rng.Gaussian();
    d.x(i, 1) = 1.0 * sy + 0.5 * rng.Gaussian();
    d.x(i, 2) = (a == 1 ? 1.0 : -1.0) + 0.1 * rng.Gaussian();
    for (int k = 3; k < 6; ++k) d.x(i, k) = rng.Gaussian();
    d.labels.push_back(y);
    d.adversary_labels.push_back(a);
  }
  return d;
}

inline emoeval::nn::GraphSpec ConfoundSpec(bool adversarial, double lambda = 1.0) {
  emoeval::nn::GraphSpec s;
  s.input_dim = 6;
  s.trunk = {64};
  s.primary.n_classes = 2;
  s.adversary = emoeval::nn::HeadSpec{{64}, 2};
  s.grl_lambda = adversarial ? lambda : 0.0;
  return s;
}

inline emoeval::nn::TrainConfig ConfoundTrainConfig(bool adversarial, uint64_t seed) {
  emoeval::nn::TrainConfig cfg;
  cfg.optimizer.lr = 0.001;
  cfg.max_epochs = 300;
  cfg.patience = 50;
  cfg.batch_size = 64;
  cfg.seed = seed;
  if (adversarial) cfg.objective.terms.insert(emoeval::nn::LossTerm::kAdversaryCeReversed);
  return cfg;
}

struct ConfoundOutcome {
  double plain_attacker_uar = 0.0;
  double adversarial_attacker_uar = 0.0;
  double adversary_head_uar = 0.0;  // validation, adversarial model
  double primary_uar = 0.0;         // validation, adversarial model
  double drop() const { return plain_attacker_uar - adversarial_attacker_uar; }
};

// Trains a plain and an adversarial model on one draw of the confound corpus
// and attacks both frozen trunks with the cross-corpus protocol.
inline ConfoundOutcome RunConfound(uint64_t seed) {
  namespace nn = emoeval::nn;
  namespace privacy = emoeval::privacy;
  const auto tr = ConfoundCorpus(600, seed * 10 + 1), va = ConfoundCorpus(200, seed * 10 + 2);
  const auto d1 = ConfoundCorpus(400, seed * 10 + 3), d2 = ConfoundCorpus(400, seed * 10 + 4);
  privacy::RepresentationSet s1{d1.x, {{"g", d1.adversary_labels}}, "d1"};
  privacy::RepresentationSet s2{d2.x, {{"g", d2.adversary_labels}}, "d2"};
  privacy::AttackerConfig ac;
  ac.seed = seed;
  ConfoundOutcome out;
  for (bool adv : {false, true}) {
    const auto r = nn::Train(nn::ModelGraph(ConfoundSpec(adv), seed), tr, va,
                             ConfoundTrainConfig(adv, seed));
    const double att =
        privacy::SirProtocol(privacy::GraphEmbedder(r.graph), s1, s2, "g", ac).attacker_uar;
    if (adv) {
      out.adversarial_attacker_uar = att;
      out.adversary_head_uar = nn::AdversaryUar(r.graph, va);
      out.primary_uar = nn::PrimaryUar(r.graph, va);
    } else {
      out.plain_attacker_uar = att;
    }
  }
  return out;
}

}  // namespace testutil

#endif  // EMOEVAL_TESTS_SYNTHETIC_H_
