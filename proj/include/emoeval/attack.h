// include/emoeval/attack.h

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

#ifndef EMOEVAL_ATTACK_H_
#define EMOEVAL_ATTACK_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emoeval/augment.h"
#include "json.hpp"

namespace emoeval {
namespace attack {

using augment::AugmentInput;
using augment::NoiseCategory;
using augment::NoiseSpec;
using dsp::Waveform;

// Opaque classifier. Every Predict call is counted.
class BlackBoxModel {
 public:
  using PredictFn = std::function<std::string(const Waveform&)>;

  explicit BlackBoxModel(PredictFn fn) : fn_(std::move(fn)) {}

  std::string Predict(const Waveform& w) {
    ++query_counter_;
    return fn_(w);
  }
  int64_t query_counter() const { return query_counter_; }

 private:
  PredictFn fn_;
  int64_t query_counter_ = 0;
};

// Model adapter that writes each query to `scratch_dir` as a WAV file, runs
// `command <wav path>` and takes the first line of stdout as the label.
BlackBoxModel::PredictFn SubprocessAdapter(const std::string& command,
                                           const std::string& scratch_dir);

enum class PoolMode { kAllNoises, kPerceptionRetaining, kReverbOnly };
enum class Ordering { kRandom, kKnownDegradation };

PoolMode ParsePoolMode(const std::string& s);
std::string PoolModeName(PoolMode m);

struct AttackConfig {
  std::vector<NoiseCategory> noise_pool = augment::AllCategories();
  PoolMode pool_mode = PoolMode::kAllNoises;
  std::optional<int> budget = 25;  // nullopt is an unbounded budget
  Ordering ordering = Ordering::kRandom;
  std::map<NoiseCategory, double> known_degradation;
  int max_drop_db = 10;
  std::vector<int> coarse_levels = {1, 5, 10};
  int runs = 5;
  augment::PerceptionTable perception;
};

// Budgets reported in the robustness tables, and the variant from the prose.
const std::vector<std::optional<int>>& TableBudgets();
const std::vector<std::optional<int>>& ProseBudgets();

void ValidateConfig(const AttackConfig& config);

// Draws one variation of a category. Used to fill the pool.
using SpecSampler = std::function<NoiseSpec(NoiseCategory, Rng*)>;

// Parameter ranges for the built-in noise variations. Categories that need an
// asset draw from `assets`; a category with no assets is left out of the pool.
struct VariationRanges {
  std::map<NoiseCategory, std::vector<std::string>> assets;
  std::vector<double> env_snr_db = {20.0, 10.0, 0.0};
  std::vector<double> utt_speed_factors = {1.25, 0.75};
  double semitones_per_step = 1.0;
};

SpecSampler DefaultSampler(const VariationRanges& ranges);
bool SamplerSupports(const VariationRanges& ranges, NoiseCategory c);

// Ordered candidate noises, one per category of the (mode-filtered) pool.
// Random ordering shuffles the pool with the seed; known ordering sorts by
// descending degradation. Each category's variation is drawn from a generator keyed on (seed,
// category), so it does not depend on which other categories are present.
std::vector<NoiseSpec> OrderPool(const AttackConfig& config, uint64_t seed,
                                 const SpecSampler& sampler);

// Produces the sample degraded by `drop_db` dB of SNR under `spec`.
using Perturber =
    std::function<Waveform(const AugmentInput&, const NoiseSpec&, int drop_db)>;

// Applies the noise, takes the residual against the content-aligned clean
// signal and rescales it so the SNR is reference_db - drop_db.
Perturber ResidualPerturber(augment::AssetLoader loader, double reference_db = 20.0,
                            uint64_t seed = 0);

enum class ExitCode { kSuccess, kFailure };

struct AttackOutcome {
  ExitCode exit = ExitCode::kFailure;
  std::optional<NoiseSpec> spec;
  std::optional<int> min_drop_db;
  int64_t queries_used = 0;
};

// Staircase search: every candidate at coarse level 1, then 5, then 10 dB
// drop. After the first flip at a coarse level, integer drops above the
// previous level are scanned upwards and the first flip is reported. The
// clean baseline prediction is not charged to the budget.
AttackOutcome RunAttack(BlackBoxModel* model, const AugmentInput& sample,
                        const AttackConfig& config, uint64_t seed,
                        const SpecSampler& sampler, const Perturber& perturber);

struct RunRecord {
  std::string sample_id;
  int run = 0;
  AttackOutcome outcome;
};

struct AggregateResult {
  double success_rate = 0.0;
  double robustness = 1.0;  // 1 - success_rate
  std::vector<double> per_sample;
  std::vector<RunRecord> records;
};

// Averages success over config.runs seeded repetitions per sample, then over
// samples.
AggregateResult Aggregate(BlackBoxModel* model, const std::vector<AugmentInput>& samples,
                          const AttackConfig& config, uint64_t seed,
                          const SpecSampler& sampler, const Perturber& perturber);

// One line of the attack report.
nlohmann::ordered_json RecordToJson(const RunRecord& r);

}  // namespace attack
}  // namespace emoeval

#endif  // EMOEVAL_ATTACK_H_
