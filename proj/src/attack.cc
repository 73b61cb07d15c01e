// src/attack.cc

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

#include "emoeval/attack.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "emoeval/error.h"
#include "emoeval/hash.h"

namespace emoeval {
namespace attack {

BlackBoxModel::PredictFn SubprocessAdapter(const std::string& command,
                                           const std::string& scratch_dir) {
  std::filesystem::create_directories(scratch_dir);
  auto counter = std::make_shared<int64_t>(0);
  return [command, scratch_dir, counter](const Waveform& w) -> std::string {
    const std::string path =
        (std::filesystem::path(scratch_dir) / ("query_" + std::to_string((*counter)++ % 2) + ".wav"))
            .string();
    dsp::WriteWav(w, path);
    std::string quoted = "'";
    for (char c : path) {
      if (c == '\'') {
        quoted += "'\\''";
      } else {
        quoted += c;
      }
    }
    quoted += "'";
    const std::string cmd = command + " " + quoted;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw IoError("cannot run model adapter: " + command);
    std::string out;
    char buf[256];
    while (std::fgets(buf, sizeof(buf), pipe)) out += buf;
    const int status = pclose(pipe);
    if (status != 0) {
      throw IoError("model adapter exited with status " + std::to_string(status) + ": " + cmd);
    }
    const size_t nl = out.find('\n');
    if (nl != std::string::npos) out.resize(nl);
    while (!out.empty() && (out.back() == '\r' || out.back() == ' ')) out.pop_back();
    if (out.empty()) throw IoError("model adapter printed no label: " + cmd);
    return out;
  };
}

PoolMode ParsePoolMode(const std::string& s) {
  if (s == "all_noises") return PoolMode::kAllNoises;
  if (s == "perception_retaining") return PoolMode::kPerceptionRetaining;
  if (s == "reverb_only") return PoolMode::kReverbOnly;
  throw ConfigError("unknown pool_mode: " + s);
}

std::string PoolModeName(PoolMode m) {
  switch (m) {
    case PoolMode::kAllNoises: return "all_noises";
    case PoolMode::kPerceptionRetaining: return "perception_retaining";
    case PoolMode::kReverbOnly: return "reverb_only";
  }
  return "?";
}

const std::vector<std::optional<int>>& TableBudgets() {
  static const std::vector<std::optional<int>> b = {5, 15, 25, std::nullopt};
  return b;
}

const std::vector<std::optional<int>>& ProseBudgets() {
  static const std::vector<std::optional<int>> b = {5, 15, 20, std::nullopt};
  return b;
}

void ValidateConfig(const AttackConfig& config) {
  if (config.noise_pool.empty()) throw ConfigError("attack noise pool is empty");
  if (config.budget && *config.budget <= 0) throw ConfigError("budget must be positive");
  if (config.max_drop_db <= 0 || config.max_drop_db > 10) {
    throw ConfigError("max_drop_db must be in [1, 10]");
  }
  if (config.runs < 1) throw ConfigError("runs must be >= 1");
  if (config.coarse_levels.empty()) throw ConfigError("coarse_levels is empty");
  int prev = 0;
  for (int l : config.coarse_levels) {
    if (l <= prev || l > config.max_drop_db) {
      throw ConfigError("coarse levels must increase and stay within max_drop_db");
    }
    prev = l;
  }
}

bool SamplerSupports(const VariationRanges& ranges, NoiseCategory c) {
  if (!augment::NeedsAsset(c)) return true;
  auto it = ranges.assets.find(c);
  return it != ranges.assets.end() && !it->second.empty();
}

SpecSampler DefaultSampler(const VariationRanges& ranges) {
  return [ranges](NoiseCategory c, Rng* rng) -> NoiseSpec {
    NoiseSpec s;
    s.category = c;
    auto pick = [rng](const auto& v) { return v[rng->UniformInt(v.size())]; };
    if (augment::NeedsAsset(c)) {
      auto it = ranges.assets.find(c);
      if (it == ranges.assets.end() || it->second.empty()) {
        throw ConfigError("no assets for " + augment::CategoryName(c));
      }
      s.source_asset = pick(it->second);
    }
    switch (c) {
      case NoiseCategory::kNatEnv:
      case NoiseCategory::kHumEnv:
      case NoiseCategory::kIntEnv:
        s.position = rng->Bernoulli(0.5) ? augment::Position::kAtStart
                                         : augment::Position::kContinuous;
        s.snr_db = pick(ranges.env_snr_db);
        break;
      case NoiseCategory::kSpeedUtt:
        s.speed_factor = pick(ranges.utt_speed_factors);
        break;
      case NoiseCategory::kSpeedSeg:
        s.speed_factor = 1.25;
        break;
      case NoiseCategory::kFadeIn:
      case NoiseCategory::kFadeOut:
        s.fade_rate_pct = 2.0;
        break;
      case NoiseCategory::kFillerShort:
        break;
      case NoiseCategory::kFillerLong:
        s.pause_s = 0.5;
        break;
      case NoiseCategory::kDropWord:
      case NoiseCategory::kDropLetters:
        s.drop_probability = 0.5;
        break;
      case NoiseCategory::kLaugh:
      case NoiseCategory::kCry:
        s.snr_db = 10.0;
        s.burst_position_s = rng->Uniform(0.0, 1.0);
        break;
      case NoiseCategory::kPitchUp:
      case NoiseCategory::kPitchDown:
        s.pitch_steps = 3;
        s.semitones_per_step = ranges.semitones_per_step;
        break;
      case NoiseCategory::kReverb:
        s.room.room_size = rng->Uniform(0.2, 0.9);
        s.room.wet_ratio = rng->Uniform(0.2, 0.6);
        break;
    }
    return s;
  };
}

std::vector<NoiseSpec> OrderPool(const AttackConfig& config, uint64_t seed,
                                 const SpecSampler& sampler) {
  ValidateConfig(config);
  std::vector<NoiseCategory> pool;
  for (NoiseCategory c : config.noise_pool) {
    switch (config.pool_mode) {
      case PoolMode::kAllNoises:
        pool.push_back(c);
        break;
      case PoolMode::kPerceptionRetaining:
        if (config.perception.Classify(c) == augment::PerceptionClass::kRetaining) {
          pool.push_back(c);
        }
        break;
      case PoolMode::kReverbOnly:
        if (c == NoiseCategory::kReverb) pool.push_back(c);
        break;
    }
  }
  if (pool.empty()) throw ConfigError("no noise left in the pool after applying pool_mode");

  if (config.ordering == Ordering::kKnownDegradation) {
    for (NoiseCategory c : pool) {
      if (!config.known_degradation.count(c)) {
        throw ConfigError("known_degradation ordering lacks an entry for " +
                          augment::CategoryName(c));
      }
    }
    std::stable_sort(pool.begin(), pool.end(), [&](NoiseCategory a, NoiseCategory b) {
      return config.known_degradation.at(a) > config.known_degradation.at(b);
    });
  } else {
    Rng order(DeriveSeed(seed, "attack/order"));
    order.Shuffle(&pool);
  }

  std::vector<NoiseSpec> out;
  out.reserve(pool.size());
  for (NoiseCategory c : pool) {
    Rng rng(DeriveSeed(seed, augment::CategoryName(c)));
    out.push_back(sampler(c, &rng));
  }
  return out;
}

Perturber ResidualPerturber(augment::AssetLoader loader, double reference_db,
                            uint64_t seed) {
  struct Cached {
    Waveform reference;
    Waveform residual;
    double residual_power = 0.0;
    double reference_power = 0.0;
  };
  auto cache = std::make_shared<std::unordered_map<std::string, Cached>>();
  auto mu = std::make_shared<std::mutex>();
  return [=](const AugmentInput& sample, const NoiseSpec& spec, int drop_db) -> Waveform {
    const std::string key = sample.id + "/" + augment::SpecHash(spec);
    Cached entry;
    {
      std::lock_guard<std::mutex> lock(*mu);
      auto it = cache->find(key);
      if (it != cache->end()) entry = it->second;
    }
    if (entry.reference.samples.empty()) {
      const augment::AugmentResult aug = augment::Apply(sample, spec, seed, loader);
      const Waveform& noisy = aug.edit.audio;
      const Waveform& clean = sample.audio;
      if (noisy.samples.size() == clean.samples.size()) {
        entry.reference = clean;
      } else if (spec.category == NoiseCategory::kFillerShort ||
                 spec.category == NoiseCategory::kFillerLong) {
        Waveform silent = loader(spec.source_asset);
        std::fill(silent.samples.begin(), silent.samples.end(), 0.0f);
        entry.reference =
            augment::InsertFiller(clean, sample.transcript, sample.alignments, silent,
                                  spec.category == NoiseCategory::kFillerLong, spec.pause_s)
                .audio;
      } else {
        // Content-aligned reference for edits that change the length.
        entry.reference = dsp::Resample(
            clean,
            static_cast<double>(clean.samples.size()) / std::max<size_t>(1, noisy.samples.size()));
        entry.reference.samples.resize(noisy.samples.size(), 0.0f);
      }
      entry.residual = noisy;
      for (size_t i = 0; i < noisy.samples.size(); ++i) {
        entry.residual.samples[i] = noisy.samples[i] - entry.reference.samples[i];
      }
      entry.residual_power = entry.residual.samples.empty() ? 0.0 : dsp::SignalPower(entry.residual);
      entry.reference_power =
          entry.reference.samples.empty() ? 0.0 : dsp::SignalPower(entry.reference);
      std::lock_guard<std::mutex> lock(*mu);
      (*cache)[key] = entry;
    }
    if (entry.residual_power == 0.0 || entry.reference_power == 0.0) {
      return entry.reference;
    }
    const double target = reference_db - drop_db;
    const double gain = std::sqrt(entry.reference_power /
                                  (entry.residual_power * std::pow(10.0, target / 10.0)));
    Waveform out = entry.reference;
    for (size_t i = 0; i < out.samples.size(); ++i) {
      out.samples[i] += static_cast<float>(gain * entry.residual.samples[i]);
    }
    dsp::PeakNormalize(&out);
    return out;
  };
}

AttackOutcome RunAttack(BlackBoxModel* model, const AugmentInput& sample,
                        const AttackConfig& config, uint64_t seed,
                        const SpecSampler& sampler, const Perturber& perturber) {
  ValidateConfig(config);
  std::vector<NoiseSpec> noises = OrderPool(config, seed, sampler);
  if (!sample.alignments) {
    std::erase_if(noises, [](const NoiseSpec& s) {
      return augment::NeedsAlignments(s.category);
    });
  }

  const std::string baseline = model->Predict(sample.audio);
  AttackOutcome out;
  auto exhausted = [&]() { return config.budget && out.queries_used >= *config.budget; };
  auto flips = [&](const NoiseSpec& spec, int drop) {
    ++out.queries_used;
    return model->Predict(perturber(sample, spec, drop)) != baseline;
  };
  auto success = [&](const NoiseSpec& spec, int drop) {
    out.exit = ExitCode::kSuccess;
    out.spec = spec;
    out.min_drop_db = drop;
    return out;
  };

  int prev_level = 0;
  for (int level : config.coarse_levels) {
    for (const NoiseSpec& spec : noises) {
      if (exhausted()) return out;
      if (!flips(spec, level)) continue;
      for (int drop = prev_level + 1; drop < level; ++drop) {
        if (exhausted()) return out;
        if (flips(spec, drop)) return success(spec, drop);
      }
      return success(spec, level);
    }
    prev_level = level;
  }
  return out;
}

AggregateResult Aggregate(BlackBoxModel* model, const std::vector<AugmentInput>& samples,
                          const AttackConfig& config, uint64_t seed,
                          const SpecSampler& sampler, const Perturber& perturber) {
  ValidateConfig(config);
  AggregateResult res;
  if (samples.empty()) return res;
  double total = 0.0;
  for (const AugmentInput& s : samples) {
    int successes = 0;
    for (int run = 0; run < config.runs; ++run) {
      const uint64_t run_seed = DeriveSeed(seed, s.id + "#" + std::to_string(run));
      AttackOutcome o = RunAttack(model, s, config, run_seed, sampler, perturber);
      if (o.exit == ExitCode::kSuccess) ++successes;
      res.records.push_back({s.id, run, std::move(o)});
    }
    const double rate = static_cast<double>(successes) / config.runs;
    res.per_sample.push_back(rate);
    total += rate;
  }
  res.success_rate = total / static_cast<double>(samples.size());
  res.robustness = 1.0 - res.success_rate;
  return res;
}

nlohmann::ordered_json RecordToJson(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["sample_id"] = r.sample_id;
  j["run"] = r.run;
  j["exit"] = r.outcome.exit == ExitCode::kSuccess ? "Success" : "Failure";
  j["spec_hash"] = r.outcome.spec ? augment::SpecHash(*r.outcome.spec) : "";
  j["category"] = r.outcome.spec ? augment::CategoryName(r.outcome.spec->category) : "";
  if (r.outcome.min_drop_db) {
    j["min_drop_db"] = *r.outcome.min_drop_db;
  } else {
    j["min_drop_db"] = nullptr;
  }
  j["queries"] = r.outcome.queries_used;
  return j;
}

}  // namespace attack
}  // namespace emoeval
