// tests/acceptance_test.cc

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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any of them fails or runs over its time limit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "attack_stub.h"
#include "cli_fixture.h"
#include "emoeval/attack.h"
#include "emoeval/corpus.h"
#include "emoeval/dsp.h"
#include "emoeval/evalstats.h"
#include "emoeval/hcm.h"
#include "emoeval/nn.h"
#include "emoeval/rng.h"
#include "gradcheck.h"
#include "oracles.h"
#include "synthetic.h"
#include "test_util.h"

namespace {

using namespace emoeval;

struct Verdict {
  bool ok = true;
  std::string detail;
};

// Records the first failure and keeps counting the rest.
class Tally {
 public:
  void Check(bool cond, const std::string& what) {
    ++checks_;
    if (cond) return;
    ++failures_;
    if (first_.empty()) first_ = what;
  }
  Verdict Result(const std::string& summary) const {
    std::ostringstream os;
    os << summary << "; " << checks_ - failures_ << "/" << checks_ << " checks";
    if (failures_ > 0) os << "; first failure: " << first_;
    return {failures_ == 0, os.str()};
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::string first_;
};

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

Verdict GradientCorrectness() {
  Tally t;
  double worst = 0.0;
  for (uint64_t seed = 1000; seed < 1050; ++seed) {
    const auto c = testutil::RandomGradCase(seed);
    const auto r = testutil::CheckGradients(c.graph, c.x, c.labels, c.adv_labels, c.objective);
    worst = std::max(worst, r.worst());
    t.Check(r.worst() < 1e-5, "seed " + std::to_string(seed) + " rel err " + Fmt(r.worst()));
  }
  return t.Result("50 graphs, worst relative error " + Fmt(worst));
}

Verdict AdversarialDecorrelation() {
  const int kSeeds = 8;
  double head = 0.0, primary = 0.0, drop = 0.0;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto o = testutil::RunConfound(s);
    head += o.adversary_head_uar / kSeeds;
    primary += o.primary_uar / kSeeds;
    drop += o.drop() / kSeeds;
  }
  Tally t;
  t.Check(std::fabs(head - 0.5) <= 0.05, "adversary head UAR " + Fmt(head));
  t.Check(primary >= 0.9, "primary UAR " + Fmt(primary));
  t.Check(drop >= 0.10, "attacker drop " + Fmt(drop));
  return t.Result("mean over " + std::to_string(kSeeds) + " seeds: adversary " + Fmt(head) +
                  ", primary " + Fmt(primary) + ", attacker drop " + Fmt(drop));
}

Verdict AttackMinimality() {
  Tally t;
  Rng rng(2024);
  int successes = 0;
  const auto budgets = attack::TableBudgets();
  for (int trial = 0; trial < 200; ++trial) {
    const auto stub = testutil::RandomThresholdStub(&rng);
    attack::AttackConfig cfg;
    cfg.budget = budgets[trial % budgets.size()];
    attack::BlackBoxModel model(stub);
    const auto o = attack::RunAttack(&model, testutil::SilentInput("s"), cfg, 7000 + trial,
                                     testutil::PlainSampler(), testutil::TaggingPerturber());
    if (o.exit != attack::ExitCode::kSuccess) continue;
    ++successes;
    t.Check(o.spec && o.min_drop_db &&
                stub.OracleMinDrop(o.spec->category) == o.min_drop_db,
            "trial " + std::to_string(trial));
  }
  t.Check(successes > 0, "no successful trial");

  std::vector<augment::AugmentInput> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(testutil::SilentInput("u" + std::to_string(i)));
  double all_sum = 0.0, retaining_sum = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto stub = testutil::RandomThresholdStub(&rng);
    attack::AttackConfig all;
    all.budget = std::nullopt;
    attack::AttackConfig retaining = all;
    retaining.pool_mode = attack::PoolMode::kPerceptionRetaining;
    attack::BlackBoxModel m1(stub), m2(stub);
    const double a = attack::Aggregate(&m1, samples, all, trial, testutil::PlainSampler(),
                                       testutil::TaggingPerturber()).success_rate;
    const double b = attack::Aggregate(&m2, samples, retaining, trial, testutil::PlainSampler(),
                                       testutil::TaggingPerturber()).success_rate;
    all_sum += a;
    retaining_sum += b;
    t.Check(a >= b, "pool trial " + std::to_string(trial));
  }
  return t.Result(std::to_string(successes) + "/200 successes matched the oracle; success " +
                  Fmt(all_sum / 20) + " (all) vs " + Fmt(retaining_sum / 20) + " (retaining)");
}

Verdict SnrRoundTrip() {
  Tally t;
  Rng rng(31);
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const size_t ns = 1600 + rng.UniformInt(16000);
    const size_t nn = 400 + rng.UniformInt(20000);
    const auto s = testutil::Noise(ns, rng.NextU64(), rng.Uniform(0.05, 0.9));
    const auto n = testutil::Noise(nn, rng.NextU64(), rng.Uniform(0.05, 0.9));
    for (double target : {0.0, 10.0, 20.0}) {
      const auto r = dsp::MixAtSnr(s, n, target);
      const double err = std::fabs(testutil::MeasuredSnr(s, r) - target);
      worst = std::max(worst, err);
      t.Check(err <= 0.1, "pair " + std::to_string(pair) + " target " + Fmt(target));
    }
  }
  return t.Result("100 pairs, worst error " + Fmt(worst) + " dB");
}

Verdict MfbShapeLaw() {
  Tally t;
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const int len_ms = 25 + static_cast<int>(rng.UniformInt(4000));
    const auto m = dsp::ExtractMfb(testutil::Noise(static_cast<size_t>(len_ms) * 16, trial));
    t.Check(m.num_frames == static_cast<size_t>((len_ms - 25) / 10 + 1) && m.dim == 40,
            std::to_string(len_ms) + " ms");
  }
  const auto one = dsp::ExtractMfb(testutil::Sine(440, 1.0));
  t.Check(one.num_frames == 98 && one.dim == 40,
          "1 s gave " + std::to_string(one.num_frames) + "x" + std::to_string(one.dim));
  return t.Result("1.000 s -> " + std::to_string(one.num_frames) + "x" + std::to_string(one.dim));
}

Verdict HcmOracle() {
  Tally t;
  Rng rng(51);
  for (int trial = 0; trial < 1000; ++trial) {
    oracle::Instance in;
    const size_t v = 1 + rng.UniformInt(12);
    for (size_t i = 0; i < v; ++i) in.vocab.push_back("w" + std::to_string(i));
    hcm::SaliencyRecord rec;
    rec.sample_id = "x";
    hcm::Wordlist list;
    std::vector<std::string> shuffled = in.vocab;
    rng.Shuffle(&shuffled);
    const size_t k = rng.UniformInt(std::min<size_t>(8, v) + 1);
    for (size_t i = 0; i < k; ++i) {
      // Dyadic values make every sum exact regardless of order.
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
    const std::string id = "instance " + std::to_string(trial);
    t.Check(hcm::GzSample(rec, list) == oracle::Gz(in), id + " gz");
    t.Check(hcm::SirSample(rec, list) == oracle::Sir(in), id + " sir");
    t.Check(hcm::PairwiseSample(rec, list, "A") == oracle::Pairwise(in, "A"), id + " pairwise");
  }
  hcm::SaliencyRecord ex;
  ex.sample_id = "s1";
  ex.predicted = "A";
  ex.tokens = {{"happy", 0.3}, {"sad", -0.2}, {"dog", 0.1}, {"cat", -0.1}};
  hcm::Wordlist wl;
  wl.entries = {{"happy", "A", 1.0}, {"sad", "A", 1.0}, {"bark", "B", 1.0}};
  const double worked = hcm::PairwiseSample(ex, wl, "A");
  t.Check(std::fabs(worked - 0.3) < 1e-12, "worked example gave " + Fmt(worked));
  return t.Result("1000 instances; worked pairwise example " + Fmt(worked));
}

Verdict StatisticsOracles() {
  Tally t;
  Rng rng(61);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string id = "input " + std::to_string(trial);
    const size_t n = 3 + rng.UniformInt(14);
    const int k = 2 + static_cast<int>(rng.UniformInt(3));
    std::vector<int> labels(n), preds(n);
    for (size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.UniformInt(k));
      preds[i] = static_cast<int>(rng.UniformInt(k));
    }
    t.Check(evalstats::Uar(preds, labels, k).value == oracle::Uar(preds, labels, k), id + " uar");

    std::vector<double> a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = rng.Gaussian();
      b[i] = rng.Gaussian();
    }
    t.Check(evalstats::Rmse(a, b) == oracle::Rmse(a, b), id + " rmse");

    const auto tt = evalstats::PairedT(a, b);
    const auto ref = oracle::PairedT(a, b);
    t.Check(std::fabs(tt.t - static_cast<double>(ref.t)) <= 1e-9 &&
                std::fabs(tt.p - static_cast<double>(ref.p)) <= 1e-9,
            id + " paired t");

    std::vector<double> p(n);
    for (auto& v : p) v = rng.Bernoulli(0.5) ? rng.Uniform() * 0.06 : rng.Uniform();
    const auto bh = evalstats::BenjaminiHochberg(p);
    const auto bh_ref = oracle::Bh(p, 0.05);
    t.Check(bh.significant == bh_ref.significant, id + " bh flags");

    const double r = evalstats::Pearson(a, b);
    t.Check(std::fabs(r - oracle::Pearson(a, b)) <= 1e-12, id + " pearson");

    const int runs = 1 + static_cast<int>(rng.UniformInt(20));
    const int adv = static_cast<int>(rng.UniformInt(runs + 1));
    const int norm = static_cast<int>(rng.UniformInt(runs + 1));
    t.Check(evalstats::Aps(adv, norm, runs) == oracle::Aps(adv, norm, runs), id + " aps");

    std::vector<int> r1(n), r2(n);
    evalstats::RatingTable table(2);
    for (size_t i = 0; i < n; ++i) {
      r1[i] = static_cast<int>(rng.UniformInt(3));
      r2[i] = rng.Bernoulli(0.6) ? r1[i] : static_cast<int>(rng.UniformInt(3));
      table[0].push_back(r1[i]);
      table[1].push_back(r2[i]);
    }
    const double kref = oracle::KappaTwo(r1, r2);
    if (std::isfinite(kref)) {
      t.Check(std::fabs(evalstats::CohenKappaIndividual(table) - kref) <= 1e-12, id + " kappa");
    }
  }
  const std::vector<int> y = {0, 0, 0, 1, 1, 1, 2, 2, 2};
  const std::vector<int> constant(9, 2);
  const double chance = evalstats::Uar(constant, y, 3).value;
  t.Check(std::fabs(chance - 0.33) < 0.005, "chance UAR " + Fmt(chance));
  return t.Result("1000 inputs; constant 3-class predictor UAR " + Fmt(chance));
}

Verdict IntegratedGradients() {
  Tally t;
  Rng rng(71);
  double worst = 0.0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    nn::GraphSpec s;
    s.input_dim = 3 + static_cast<int>(rng.UniformInt(6));
    s.trunk = {4 + static_cast<int>(rng.UniformInt(12))};
    s.primary.n_classes = 2 + static_cast<int>(rng.UniformInt(3));
    const nn::ModelGraph g(s, 900 + seed);
    nn::Vector x(s.input_dim);
    for (int i = 0; i < s.input_dim; ++i) x(i) = rng.Gaussian();
    const nn::Vector base = nn::Vector::Zero(s.input_dim);
    const int cls = static_cast<int>(rng.UniformInt(s.primary.n_classes));
    const nn::Vector ig = nn::IntegratedGradients(g, x, base, 512, cls);
    const double fx = g.Forward(nn::Matrix(x.transpose())).primary_logits()(0, cls);
    const double fb = g.Forward(nn::Matrix(base.transpose())).primary_logits()(0, cls);
    const double residual = std::fabs(ig.sum() - (fx - fb));
    worst = std::max(worst, residual);
    t.Check(residual < 1e-3, "network " + std::to_string(seed) + " residual " + Fmt(residual));
  }
  double linear_worst = 0.0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    nn::GraphSpec s;
    s.input_dim = 2 + static_cast<int>(rng.UniformInt(6));
    s.primary.n_classes = 2 + static_cast<int>(rng.UniformInt(3));
    const nn::ModelGraph g(s, 500 + seed);
    nn::Vector x(s.input_dim);
    for (int i = 0; i < s.input_dim; ++i) x(i) = rng.Gaussian();
    for (int cls = 0; cls < s.primary.n_classes; ++cls) {
      const nn::Vector ig = nn::IntegratedGradients(g, x, nn::Vector::Zero(s.input_dim), 7, cls);
      const nn::Vector w = g.params().primary[0].w.row(cls).transpose();
      const double err = (ig - x.cwiseProduct(w)).cwiseAbs().maxCoeff();
      linear_worst = std::max(linear_worst, err);
      t.Check(err < 1e-12, "linear " + std::to_string(seed));
    }
  }
  return t.Result("worst residual " + Fmt(worst) + "; linear worst " + Fmt(linear_worst));
}

Verdict BinningGrid() {
  Tally t;
  long points = 0;
  for (int k = 100; k <= 900; ++k, ++points) {
    t.Check(static_cast<int>(corpus::BinMuse(k / 100.0)) == oracle::MuseClass(k / 100.0),
            "muse " + Fmt(k / 100.0));
  }
  for (int k = 100; k <= 500; ++k, ++points) {
    t.Check(static_cast<int>(corpus::BinIemocap(k / 100.0)) == oracle::IemocapClass(k / 100.0),
            "iemocap " + Fmt(k / 100.0));
  }
  // Integer hundredths make the reference comparison exact.
  for (int mean : {0, 750, 1000, 1611, 2037}) {
    for (int d = -600; d <= 600; ++d, ++points) {
      const int expect = d <= -200 ? 0 : (d <= 200 ? 1 : 2);
      const auto got = corpus::BinStress((mean + d) / 100.0, mean / 100.0);
      t.Check(static_cast<int>(got) == expect,
              "stress " + Fmt((mean + d) / 100.0) + " mean " + Fmt(mean / 100.0));
    }
  }
  return t.Result(std::to_string(points) + " grid points");
}

Verdict CliDeterminism() {
  Tally t;
  testutil::CliWorkspace ws(EMOEVAL_STUB_MODEL);
  testutil::TempDir scratch;
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"augment", "augment.json"},         {"features", "features.json"},
      {"train", "train.json"},             {"attack", "attack.json"},
      {"eval-hcm", "eval_hcm.json"},       {"eval-privacy", "eval_sir.json"},
      {"eval-privacy", "eval_membership.json"}, {"report", "report.json"}};
  for (const auto& [cmd, cfg] : runs) {
    const auto a = testutil::RunCli(EMOEVAL_CLI, {cmd, "-c", ws.path(cfg), "--seed", "9"}, scratch);
    const auto b = testutil::RunCli(EMOEVAL_CLI, {cmd, "-c", ws.path(cfg), "--seed", "9"}, scratch);
    t.Check(a.exit_code == 0 && b.exit_code == 0, cfg + " exited " + std::to_string(a.exit_code));
    t.Check(!a.out.empty() && a.out == b.out, cfg + " report differs");
  }
  return t.Result(std::to_string(runs.size()) + " command configs rerun");
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"gradient correctness", 30, GradientCorrectness},
      {"adversarial decorrelation", 120, AdversarialDecorrelation},
      {"attack minimality", 60, AttackMinimality},
      {"snr round trip", 10, SnrRoundTrip},
      {"mfb shape law", 10, MfbShapeLaw},
      {"hcm oracle equivalence", 10, HcmOracle},
      {"statistics oracles", 30, StatisticsOracles},
      {"integrated gradients", 20, IntegratedGradients},
      {"binning grid", 5, BinningGrid},
      {"cli determinism", 60, CliDeterminism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = v.ok && in_time;
    if (!pass) ++failed;
    std::printf("%s %2zu %-26s %7.2fs/%3.0fs  %s%s\n", pass ? "PASS" : "FAIL", i + 1, c.name,
                secs, c.limit_s, v.detail.c_str(), in_time ? "" : " (over time limit)");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
