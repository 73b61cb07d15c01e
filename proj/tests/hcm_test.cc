// tests/hcm_test.cc

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

#include <cmath>

#include <gtest/gtest.h>

#include "emoeval/error.h"
#include "emoeval/rng.h"
#include "oracles.h"
#include "test_util.h"

namespace emoeval {
namespace hcm {
namespace {

SaliencyRecord Rec(std::vector<SaliencyToken> toks, std::string predicted = "") {
  SaliencyRecord r;
  r.sample_id = "s";
  r.tokens = std::move(toks);
  if (!predicted.empty()) r.predicted = predicted;
  return r;
}

Wordlist List(std::vector<WordEntry> e) { return Wordlist{std::move(e)}; }

TEST(Intersect, CaseFoldedExactMatch) {
  const auto s = Rec({{"Good", 0.4}, {"table", 0.2}});
  const auto m = Intersect(s, List({{"good", std::nullopt, 1.0}}));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].word, "good");
  EXPECT_TRUE(Intersect(s, List({{"chair", std::nullopt, 1.0}})).empty());
  EXPECT_EQ(Intersect(s, List({{"GOOD", std::nullopt, 1.0}, {"table", std::nullopt, 1.0}})).size(),
            2u);
  // No stemming.
  EXPECT_TRUE(Intersect(s, List({{"goods", std::nullopt, 1.0}})).empty());
}

TEST(GzSample, Examples) {
  const auto s = Rec({{"good", 0.4}, {"table", 0.2}});
  EXPECT_DOUBLE_EQ(GzSample(s, List({{"good", std::nullopt, 1.0}})), 0.4);
  EXPECT_EQ(GzSample(Rec({{"good", 0.0}}), List({{"good", std::nullopt, 1.0}})), 0.0);
  const auto l1 = List({{"good", std::nullopt, 0.5}, {"table", std::nullopt, 1.5}});
  const auto l2 = List({{"good", std::nullopt, 1.0}, {"table", std::nullopt, 3.0}});
  EXPECT_DOUBLE_EQ(GzSample(s, l2), 2.0 * GzSample(s, l1));
  EXPECT_EQ(GzSample(s, List({{"x", std::nullopt, 1.0}})), 0.0);
}

TEST(SirSample, Examples) {
  EXPECT_DOUBLE_EQ(SirSample(Rec({{"she", 0.4}}), List({{"she", std::nullopt, 1.0}})), 0.6);
  EXPECT_DOUBLE_EQ(SirSample(Rec({{"she", 0.0}}), List({{"she", std::nullopt, 2.0}})), 2.0);
  EXPECT_EQ(SirSample(Rec({{"she", 1.0}, {"he", -1.0}}),
                      List({{"she", std::nullopt, 1.0}, {"he", std::nullopt, 1.0}})),
            0.0);
  EXPECT_EQ(SirSample(Rec({{"a", 0.3}}), List({{"she", std::nullopt, 1.0}})), 1.0);
}

TEST(SirSample, UnnormalizedModeIsAPlainSum) {
  const auto s = Rec({{"she", 0.4}, {"her", 0.2}});
  const auto l = List({{"she", std::nullopt, 1.0}, {"her", std::nullopt, 1.0}});
  EXPECT_DOUBLE_EQ(SirSample(s, l, Normalization::kUnnormalized), 1.4);
  EXPECT_DOUBLE_EQ(SirSample(s, l), 0.7);
  EXPECT_DOUBLE_EQ(GzSample(s, l, Normalization::kUnnormalized), 0.6000000000000001);
}

TEST(PairwiseSample, WorkedExample) {
  const auto s = Rec({{"happy", 0.3}, {"sad", -0.2}, {"dog", 0.1}, {"cat", -0.1}});
  const auto l = List({{"happy", std::string("A"), 1.0}, {"sad", std::string("A"), 1.0},
                       {"bark", std::string("B"), 1.0}});
  EXPECT_NEAR(PairwiseSample(s, l, "A"), 0.3, 1e-15);
}

TEST(PairwiseSample, NegligibleSaliencyGivesZero) {
  const auto s = Rec({{"happy", 0.05}, {"sad", -0.05}, {"dog", 0.01}});
  const auto l = List({{"happy", std::string("A"), 1.0}});
  EXPECT_EQ(PairwiseSample(s, l, "A"), 0.0);
}

TEST(PairwiseSample, EmptyClassListCollapses) {
  const auto s = Rec({{"happy", 0.3}, {"sad", -0.2}, {"dog", 0.1}});
  const auto l = List({{"happy", std::string("B"), 1.0}});
  EXPECT_NEAR(PairwiseSample(s, l, "A"), -0.2 - (0.3 + 0.1), 1e-15);
}

TEST(PairwiseSample, MissingClassLabelIsConfigError) {
  const auto s = Rec({{"happy", 0.3}});
  EXPECT_THROW(PairwiseSample(s, List({{"happy", std::nullopt, 1.0}}), "A"), ConfigError);
}

TEST(PairwiseSample, AbsoluteVariant) {
  const auto s = Rec({{"happy", 0.3}, {"sad", -0.2}, {"dog", 0.1}, {"cat", -0.1}});
  const auto l = List({{"happy", std::string("A"), 1.0}, {"sad", std::string("A"), 1.0}});
  EXPECT_NEAR(PairwiseSample(s, l, "A", PairwiseVariant::kAbsolute), (0.3 + 0.1) - (0.2 + 0.1),
              1e-15);
}

TEST(Classify, ThresholdIsStrict) {
  EXPECT_EQ(Classify(0.05), Polarity::kNegligible);
  EXPECT_EQ(Classify(-0.05), Polarity::kNegligible);
  EXPECT_EQ(Classify(std::nextafter(0.05, 1.0)), Polarity::kPositive);
  EXPECT_EQ(Classify(std::nextafter(-0.05, -1.0)), Polarity::kNegative);
}

TEST(Monotonicity, GzRisesAndSirFallsWithSaliencyMagnitude) {
  Rng rng(21);
  const auto l = List({{"a", std::nullopt, 0.7}, {"b", std::nullopt, 1.3}});
  for (int trial = 0; trial < 200; ++trial) {
    const double la = rng.Uniform(-1, 1), lb = rng.Uniform(-1, 1);
    const double bump = rng.Uniform(0, 1 - std::fabs(la));
    const double la2 = la >= 0 ? la + bump : la - bump;
    const auto s1 = Rec({{"a", la}, {"b", lb}});
    const auto s2 = Rec({{"a", la2}, {"b", lb}});
    EXPECT_LE(GzSample(s1, l), GzSample(s2, l));
    EXPECT_GE(SirSample(s1, l), SirSample(s2, l));
  }
}

TEST(OracleEquivalence, RandomInstances) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    oracle::Instance in;
    const size_t v = 1 + rng.UniformInt(12);
    for (size_t i = 0; i < v; ++i) in.vocab.push_back("w" + std::to_string(i));
    SaliencyRecord rec;
    rec.sample_id = "x";
    Wordlist list;
    std::vector<std::string> shuffled = in.vocab;
    rng.Shuffle(&shuffled);
    const size_t k = rng.UniformInt(std::min<size_t>(8, v) + 1);
    for (size_t i = 0; i < k; ++i) {
      // Dyadic values keep every sum exact regardless of order.
      const double lam = static_cast<double>(static_cast<int>(rng.UniformInt(129)) - 64) / 64.0;
      in.sample[shuffled[i]] = lam;
      rec.tokens.push_back({shuffled[i], lam});
    }
    const std::string classes[] = {"A", "B"};
    for (const auto& w : in.vocab) {
      if (!rng.Bernoulli(0.5)) continue;
      const double omega = static_cast<double>(1 + rng.UniformInt(16)) / 8.0;
      const std::string cls = classes[rng.UniformInt(2)];
      in.list[w] = omega;
      in.list_class[w] = cls;
      list.entries.push_back({w, cls, omega});
    }
    EXPECT_EQ(GzSample(rec, list), oracle::Gz(in));
    EXPECT_EQ(SirSample(rec, list), oracle::Sir(in));
    EXPECT_EQ(PairwiseSample(rec, list, "A"), oracle::Pairwise(in, "A"));
  }
}

TEST(DatasetScore, MeanOverSamples) {
  const auto l = List({{"good", std::nullopt, 1.0}});
  SaliencyRecord a = Rec({{"good", 0.2}}), b = Rec({{"good", 0.4}});
  a.sample_id = "a";
  b.sample_id = "b";
  EXPECT_NEAR(DatasetScore({a, b}, l, ScoreKind::kGz, ScoreMode::kCombined).value, 0.3, 1e-15);
  EXPECT_EQ(DatasetScore({b, a}, l, ScoreKind::kGz, ScoreMode::kCombined).value,
            DatasetScore({a, b}, l, ScoreKind::kGz, ScoreMode::kCombined).value);
  EXPECT_DOUBLE_EQ(DatasetScore({a, a, a}, l, ScoreKind::kGz, ScoreMode::kCombined).value,
                   GzSample(a, l));
  EXPECT_THROW(DatasetScore({}, l, ScoreKind::kGz, ScoreMode::kCombined), DomainError);
  EXPECT_THROW(DatasetScore({a}, l, ScoreKind::kGz, ScoreMode::kPairwise), ConfigError);
}

TEST(RelativeImprovement, Examples) {
  std::map<std::string, double> orig = {{"a", 0.2}, {"b", 0.4}};
  EXPECT_EQ(RelativeImprovement(orig, orig).value, 0.0);
  std::map<std::string, double> twice = {{"a", 0.4}, {"b", 0.8}};
  EXPECT_DOUBLE_EQ(RelativeImprovement(twice, orig).value, 1.0);
  std::map<std::string, double> next = {{"a", 0.3}, {"b", 0.4}};
  EXPECT_NEAR(RelativeImprovement(next, orig).value, 0.25, 1e-15);
  std::map<std::string, double> with_zero = {{"a", 0.2}, {"z", 0.0}};
  std::map<std::string, double> with_zero_new = {{"a", 0.3}, {"z", 0.5}};
  const auto r = RelativeImprovement(with_zero_new, with_zero);
  EXPECT_EQ(r.skipped, 1);
  EXPECT_EQ(r.used, 1);
  std::map<std::string, double> zeros = {{"a", 0.0}};
  EXPECT_THROW(RelativeImprovement(zeros, zeros), UndefinedMetricError);
}

TEST(BinLexiconValence, TertileSplit) {
  const auto three = BinLexiconValence({{"a", -1.0}, {"b", 0.0}, {"c", 1.0}});
  EXPECT_EQ(*three.entries[0].class_label, "low");
  EXPECT_EQ(*three.entries[1].class_label, "med");
  EXPECT_EQ(*three.entries[2].class_label, "high");
  const auto six = BinLexiconValence(
      {{"a", 0.5}, {"b", -0.5}, {"c", 0.1}, {"d", -0.9}, {"e", 0.9}, {"f", -0.1}});
  std::map<std::string, int> sizes;
  for (const auto& e : six.entries) ++sizes[*e.class_label];
  EXPECT_EQ(sizes["low"], 2);
  EXPECT_EQ(sizes["med"], 2);
  EXPECT_EQ(sizes["high"], 2);
  EXPECT_EQ(*six.entries[3].class_label, "low");
  EXPECT_EQ(*six.entries[4].class_label, "high");
  EXPECT_THROW(BinLexiconValence({{"a", 0.0}, {"b", 1.0}}), DomainError);
}

TEST(BinLexiconValence, ClassSizesDifferByAtMostOneAndTiesKeepOrder) {
  Rng rng(8);
  for (size_t n = 3; n < 40; ++n) {
    std::vector<std::pair<std::string, double>> raw;
    for (size_t i = 0; i < n; ++i) {
      raw.push_back({"w" + std::to_string(i), std::round(rng.Uniform(-1, 1) * 4) / 4});
    }
    const auto out = BinLexiconValence(raw);
    std::map<std::string, int> sizes;
    for (const auto& e : out.entries) ++sizes[*e.class_label];
    int lo = 1 << 30, hi = 0;
    for (const auto& [k, v] : sizes) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    EXPECT_LE(hi - lo, 1);
    // Equal valences never land in a lower class when they appear later.
    auto rank = [](const std::string& c) { return c == "low" ? 0 : c == "med" ? 1 : 2; };
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        if (raw[i].second == raw[j].second) {
          EXPECT_LE(rank(*out.entries[i].class_label), rank(*out.entries[j].class_label));
        }
      }
    }
  }
}

TEST(Io, WordlistAndSaliencyRoundTrip) {
  testutil::TempDir dir;
  testutil::WriteText(dir.file("w.tsv"), "# comment\nhappy\tA\t2\nsad\tA\ndog\n\n");
  const auto l = ReadWordlist(dir.file("w.tsv"));
  ASSERT_EQ(l.entries.size(), 3u);
  EXPECT_EQ(l.entries[0].weight, 2.0);
  EXPECT_EQ(l.entries[1].weight, 1.0);
  EXPECT_FALSE(l.entries[2].class_label.has_value());
  WriteWordlist(dir.file("w2.tsv"), l);
  EXPECT_EQ(ReadWordlist(dir.file("w2.tsv")).entries.size(), 3u);

  testutil::WriteText(dir.file("bad.tsv"), "happy\tA\tlots\n");
  EXPECT_THROW(ReadWordlist(dir.file("bad.tsv")), IoError);
  testutil::WriteText(dir.file("dup.tsv"), "happy\tA\nhappy\tA\n");
  EXPECT_THROW(ReadWordlist(dir.file("dup.tsv")), DomainError);
  EXPECT_THROW(ReadWordlist(dir.file("missing.tsv")), IoError);

  std::vector<SaliencyRecord> recs = {Rec({{"happy", 0.3}, {"dog", -0.1}}, "A")};
  WriteSaliency(dir.file("s.jsonl"), recs);
  const auto back = ReadSaliency(dir.file("s.jsonl"));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].tokens.size(), 2u);
  EXPECT_EQ(*back[0].predicted, "A");
  EXPECT_EQ(back[0].tokens[1].saliency, -0.1);
}

TEST(Validation, RejectsDuplicatesAndNonFinite) {
  EXPECT_THROW(ValidateRecord(Rec({{"a", 0.1}, {"A", 0.2}})), DomainError);
  EXPECT_THROW(ValidateRecord(Rec({{"a", NAN}})), DomainError);
  EXPECT_THROW(ValidateWordlist(List({{"a", std::nullopt, INFINITY}})), DomainError);
  EXPECT_NO_THROW(ValidateWordlist(List({{"a", std::string("x"), 1}, {"a", std::string("y"), 1}})));
}

}  // namespace
}  // namespace hcm
}  // namespace emoeval
