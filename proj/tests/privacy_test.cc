// tests/privacy_test.cc

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

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "emoeval/error.h"
#include "emoeval/nn.h"
#include "emoeval/rng.h"
#include "synthetic.h"
#include "test_util.h"

namespace emoeval {
namespace privacy {
namespace {

// Fast attacker grid for unit tests.
AttackerConfig SmallAttacker(uint64_t seed = 0) {
  AttackerConfig c;
  c.depths = {2};
  c.widths = {32};
  c.train.optimizer.lr = 0.003;
  c.train.max_epochs = 40;
  c.train.patience = 5;
  c.seed = seed;
  return c;
}

RepresentationSet RandomSet(int n, int dim, uint64_t seed) {
  Rng rng(seed);
  RepresentationSet r;
  r.vectors.resize(n, dim);
  std::vector<int> attr;
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) r.vectors(i, d) = rng.Gaussian();
    attr.push_back(i % 2);
  }
  r.labels["gender"] = attr;
  r.provenance = "random";
  return r;
}

RepresentationSet OneHotAttribute(int n, uint64_t seed) {
  Rng rng(seed);
  RepresentationSet r;
  r.vectors = Matrix::Zero(n, 2);
  std::vector<int> attr;
  for (int i = 0; i < n; ++i) {
    const int a = static_cast<int>(rng.UniformInt(2));
    r.vectors(i, a) = 1.0;
    attr.push_back(a);
  }
  r.labels["gender"] = attr;
  return r;
}

// 20 speakers with ten rows each. Vectors are one-hot speaker codes followed
// by two noise dimensions.
RepresentationSet SpeakerCorpus(uint64_t seed) {
  Rng rng(seed);
  const int speakers = 20, per = 10;
  RepresentationSet r;
  r.vectors = Matrix::Zero(speakers * per, speakers + 2);
  std::vector<int> spk, gender;
  for (int s = 0; s < speakers; ++s) {
    for (int k = 0; k < per; ++k) {
      const int row = s * per + k;
      r.vectors(row, s) = 1.0;
      r.vectors(row, speakers) = rng.Gaussian();
      r.vectors(row, speakers + 1) = rng.Gaussian();
      spk.push_back(s);
      gender.push_back(s % 2);
    }
  }
  r.labels["speaker"] = spk;
  r.labels["gender"] = gender;
  return r;
}

// Keeps the speaker code only for speakers seen in training.
EmbedFn MemorizingTrainer(const RepresentationSet& train) {
  std::set<int> seen(train.labels.at("speaker").begin(), train.labels.at("speaker").end());
  return [seen](const Matrix& x) {
    Matrix out = x.leftCols(20);
    for (int s = 0; s < 20; ++s) {
      if (!seen.count(s)) out.col(s).setZero();
    }
    return out;
  };
}

EmbedFn ForgetfulTrainer(const RepresentationSet&) {
  return [](const Matrix& x) { return Matrix(x.rightCols(2)); };
}

// 30 speakers whose rows share a 128-dimensional speaker code and a
// speaker-specific emotion label. With few training speakers against many
// code dimensions, a plain model memorizes who it has seen.
RepresentationSet MemorableSpeakers(uint64_t seed) {
  Rng rng(seed);
  const int speakers = 30, per = 20, dim = 128;
  RepresentationSet r;
  r.vectors.resize(speakers * per, dim);
  std::vector<int> spk, gender, emotion;
  for (int s = 0; s < speakers; ++s) {
    std::vector<double> code(dim);
    for (auto& c : code) c = rng.Gaussian();
    const int label = static_cast<int>(rng.UniformInt(2));
    for (int k = 0; k < per; ++k) {
      for (int d = 0; d < dim; ++d) r.vectors(s * per + k, d) = code[d] + 0.3 * rng.Gaussian();
      spk.push_back(s);
      gender.push_back(s % 2);
      emotion.push_back(label);
    }
  }
  r.labels["speaker"] = spk;
  r.labels["gender"] = gender;
  r.labels["emotion"] = emotion;
  return r;
}

// Trains an emotion model, optionally with a reversed speaker-id adversary.
Trainer EmotionTrainer(bool speaker_invariant, uint64_t seed) {
  return [=](const RepresentationSet& t) {
    nn::GraphSpec gs;
    gs.input_dim = t.vectors.cols();
    gs.trunk = {32};
    gs.primary.n_classes = 2;
    gs.adversary = nn::HeadSpec{{32}, 30};
    gs.grl_lambda = speaker_invariant ? 1.0 : 0.0;
    const nn::Dataset d{t.vectors, t.labels.at("emotion"), t.labels.at("speaker")};
    nn::TrainConfig cfg;
    cfg.optimizer.lr = 0.001;
    cfg.max_epochs = 200;
    cfg.patience = 199;
    cfg.seed = seed;
    cfg.chance_tolerance = 1.0;
    if (speaker_invariant) cfg.objective.terms.insert(nn::LossTerm::kAdversaryCeReversed);
    return GraphEmbedder(nn::Train(nn::ModelGraph(gs, seed), d, d, cfg).graph);
  };
}

TEST(SirFromUar, ArithmeticAndClamp) {
  EXPECT_DOUBLE_EQ(SirFromUar(0.68), 1.0 - 0.68);
  EXPECT_NEAR(SirFromUar(0.68), 0.32, 1e-15);
  EXPECT_EQ(SirFromUar(1.0), 0.0);
  EXPECT_EQ(SirFromUar(0.3), 0.5);
  EXPECT_EQ(SirFromUar(0.5), 0.5);
}

TEST(Leakage, RequiresAdversaryHead) {
  nn::GraphSpec s = testutil::ConfoundSpec(false);
  s.adversary.reset();
  const auto d = testutil::ConfoundCorpus(20, 1);
  EXPECT_THROW(Leakage(nn::ModelGraph(s, 1), d.x, d.adversary_labels), ConfigError);
}

TEST(Leakage, RandomHeadIsNearChance) {
  const auto d = testutil::ConfoundCorpus(4000, 2);
  std::vector<int> coin;
  Rng rng(3);
  for (int i = 0; i < 4000; ++i) coin.push_back(static_cast<int>(rng.UniformInt(2)));
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const double u = Leakage(nn::ModelGraph(testutil::ConfoundSpec(false), seed), d.x, coin);
    EXPECT_NEAR(u, 0.5, 0.05);
    EXPECT_GE(u, 0.0);
    EXPECT_LE(u, 1.0);
  }
}

TEST(Leakage, JointlyTrainedHeadFindsPredictiveFeature) {
  const auto tr = testutil::ConfoundCorpus(400, 4), va = testutil::ConfoundCorpus(200, 5);
  nn::TrainConfig cfg;
  cfg.optimizer.lr = 0.003;
  cfg.max_epochs = 30;
  cfg.patience = 29;
  cfg.chance_tolerance = 1.0;  // no selection constraint for this check
  cfg.objective.terms.insert(nn::LossTerm::kAdversaryCeReversed);
  const auto r = nn::Train(nn::ModelGraph(testutil::ConfoundSpec(false), 1), tr, va, cfg);
  EXPECT_GE(Leakage(r.graph, va.x, va.adversary_labels), 0.95);
}

TEST(AttackRepresentations, OneHotAttributeLeaksCompletely) {
  const auto rep =
      AttackRepresentations(OneHotAttribute(300, 1), OneHotAttribute(200, 2), "gender",
                            SmallAttacker());
  EXPECT_GE(rep.attacker_uar, 0.95);
  EXPECT_LE(rep.sir, 0.05);
  EXPECT_EQ(rep.recalls.size(), 2u);
}

TEST(AttackRepresentations, IndependentRandomEmbeddingsGiveChance) {
  const auto rep = AttackRepresentations(RandomSet(600, 8, 1), RandomSet(2000, 8, 2), "gender",
                                         SmallAttacker());
  EXPECT_NEAR(rep.sir, 0.5, 0.05);
  EXPECT_NEAR(rep.attacker_uar, 0.5, 0.05);
}

TEST(AttackRepresentations, MissingAttributeIsConfigError) {
  auto known = RandomSet(50, 3, 1);
  known.labels.erase("gender");
  EXPECT_THROW(AttackRepresentations(known, RandomSet(20, 3, 2), "gender", SmallAttacker()),
               ConfigError);
  EXPECT_THROW(AttackRepresentations(RandomSet(50, 3, 1), RandomSet(20, 4, 2), "gender",
                                     SmallAttacker()),
               DomainError);
}

TEST(AttackRepresentations, DeterministicAndGridRecorded) {
  AttackerConfig cfg = SmallAttacker(9);
  cfg.depths = {2, 3};
  const auto a = AttackRepresentations(OneHotAttribute(100, 1), RandomSet(100, 2, 2), "gender", cfg);
  const auto b = AttackRepresentations(OneHotAttribute(100, 1), RandomSet(100, 2, 2), "gender", cfg);
  EXPECT_EQ(ReportToJson(a).dump(), ReportToJson(b).dump());
  EXPECT_TRUE(a.attacker_depth == 2 || a.attacker_depth == 3);
  EXPECT_EQ(a.attacker_width, 32);
}

TEST(AttackerConfig, Validation) {
  AttackerConfig c;
  EXPECT_NO_THROW(ValidateAttackerConfig(c));
  c.depths.clear();
  EXPECT_THROW(ValidateAttackerConfig(c), ConfigError);
  c = AttackerConfig();
  c.validation_fraction = 1.0;
  EXPECT_THROW(ValidateAttackerConfig(c), ConfigError);
}

TEST(SirProtocol, EmbeddingIsAppliedToBothSets) {
  // An embedding that discards the attribute column leaves only chance.
  auto d1 = OneHotAttribute(400, 3), d2 = OneHotAttribute(400, 4);
  const EmbedFn keep = [](const Matrix& x) { return x; };
  const EmbedFn drop = [](const Matrix& x) { return Matrix(Matrix::Zero(x.rows(), 2)); };
  EXPECT_GE(SirProtocol(keep, d1, d2, "gender", SmallAttacker()).attacker_uar, 0.95);
  EXPECT_NEAR(SirProtocol(drop, d1, d2, "gender", SmallAttacker()).sir, 0.5, 0.05);
  d2.labels.clear();
  EXPECT_THROW(SirProtocol(keep, d1, d2, "gender", SmallAttacker()), ConfigError);
}

TEST(Representations, SaveLoadRoundTrip) {
  testutil::TempDir dir;
  auto r = RandomSet(7, 3, 1);
  r.labels["speaker"] = {0, 1, 2, 3, 4, 5, 6};
  SaveRepresentations(dir.file("r.bin"), r);
  const auto back = LoadRepresentations(dir.file("r.bin"));
  EXPECT_EQ(back.vectors, r.vectors);
  EXPECT_EQ(back.labels, r.labels);
  EXPECT_EQ(back.provenance, "random");
  EXPECT_THROW(LoadRepresentations(dir.file("missing.bin")), IoError);
  auto bad = r;
  bad.labels["gender"].pop_back();
  EXPECT_THROW(ValidateRepresentationSet(bad), DomainError);
}

TEST(SpeakerFolds, DisjointAndCovering) {
  std::vector<int> spk;
  for (int i = 0; i < 100; ++i) spk.push_back((i * 7) % 13);
  const auto folds = SpeakerFolds(spk, 5);
  ASSERT_EQ(folds.size(), 5u);
  std::set<size_t> all;
  std::vector<std::set<int>> fs(5);
  for (size_t f = 0; f < 5; ++f) {
    for (size_t r : folds[f]) {
      EXPECT_TRUE(all.insert(r).second);
      fs[f].insert(spk[r]);
    }
  }
  EXPECT_EQ(all.size(), 100u);
  for (size_t a = 0; a < 5; ++a) {
    for (size_t b = a + 1; b < 5; ++b) {
      for (int s : fs[a]) EXPECT_FALSE(fs[b].count(s));
    }
  }
  EXPECT_THROW(SpeakerFolds({1, 2, 3}, 5), ConfigError);
}

TEST(Membership, MemorizedSpeakersAreDetected) {
  const auto corpus = SpeakerCorpus(1);
  const auto folds = SpeakerFolds(corpus.labels.at("speaker"));
  MembershipConfig cfg;
  cfg.attacker = SmallAttacker(2);
  const auto rep = MembershipProtocol(MemorizingTrainer, corpus, folds, cfg);
  EXPECT_GE(rep.uar, 0.9);
  EXPECT_EQ(rep.selected_fold4.size(), 2u);
  EXPECT_EQ(rep.selected_fold5.size(), 2u);
  // Three full folds plus half of each selected speaker's rows.
  EXPECT_EQ(rep.training_samples, 3u * 40u + 4u * 5u);
}

TEST(Membership, SelectionIsGenderBalanced) {
  const auto corpus = SpeakerCorpus(1);
  const auto folds = SpeakerFolds(corpus.labels.at("speaker"));
  MembershipConfig cfg;
  cfg.attacker = SmallAttacker(2);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto rep = MembershipProtocol(ForgetfulTrainer, corpus, folds, cfg);
    for (const auto* sel : {&rep.selected_fold4, &rep.selected_fold5}) {
      int female = 0;
      for (int s : *sel) female += s % 2;
      EXPECT_EQ(female, 1);
    }
  }
}

TEST(Membership, ForgetfulModelStaysNearChance) {
  const auto corpus = SpeakerCorpus(3);
  const auto folds = SpeakerFolds(corpus.labels.at("speaker"));
  MembershipConfig cfg;
  cfg.attacker = SmallAttacker(4);
  double sum = 0.0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto rep = MembershipProtocol(ForgetfulTrainer, corpus, folds, cfg);
    EXPECT_GE(rep.uar, 0.0);
    EXPECT_LE(rep.uar, 1.0);
    sum += rep.uar;
  }
  EXPECT_NEAR(sum / 5.0, 0.5, 0.1);
}

TEST(Membership, NeedsTwoSpeakersPerSide) {
  // Ten speakers give two per fold, too few for a held-out side.
  std::vector<size_t> rows(100);
  for (size_t r = 0; r < 100; ++r) rows[r] = r;
  const auto corpus = Subset(SpeakerCorpus(1), rows);
  const auto folds = SpeakerFolds(corpus.labels.at("speaker"));
  MembershipConfig cfg;
  cfg.attacker = SmallAttacker();
  EXPECT_THROW(MembershipProtocol(MemorizingTrainer, corpus, folds, cfg), ConfigError);
  EXPECT_THROW(MembershipProtocol(MemorizingTrainer, SpeakerCorpus(1),
                                  std::vector<std::vector<size_t>>(4), cfg),
               ConfigError);
}

TEST(Membership, Deterministic) {
  const auto corpus = SpeakerCorpus(5);
  const auto folds = SpeakerFolds(corpus.labels.at("speaker"));
  MembershipConfig cfg;
  cfg.attacker = SmallAttacker(6);
  cfg.seed = 11;
  EXPECT_EQ(MembershipToJson(MembershipProtocol(MemorizingTrainer, corpus, folds, cfg)).dump(),
            MembershipToJson(MembershipProtocol(MemorizingTrainer, corpus, folds, cfg)).dump());
}

TEST(Membership, SpeakerInvariantTrainingLowersMembershipUar) {
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    const auto corpus = MemorableSpeakers(seed);
    const auto folds = SpeakerFolds(corpus.labels.at("speaker"));
    MembershipConfig cfg;
    cfg.seed = seed;
    cfg.attacker.seed = seed;
    const double plain = MembershipProtocol(EmotionTrainer(false, seed), corpus, folds, cfg).uar;
    const double invariant =
        MembershipProtocol(EmotionTrainer(true, seed), corpus, folds, cfg).uar;
    EXPECT_LT(invariant, plain) << "seed " << seed;
  }
}

TEST(SirProtocol, AdversarialTrunkLeaksLessThanPlainTrunk) {
  double total = 0.0;
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    const auto o = testutil::RunConfound(seed);
    EXPECT_GT(o.drop(), 0.0) << "seed " << seed;
    total += o.drop();
  }
  EXPECT_GE(total / 4.0, 0.10);
}

}  // namespace
}  // namespace privacy
}  // namespace emoeval
