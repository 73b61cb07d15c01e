// src/cli.cc

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

#include "emoeval/cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "emoeval/attack.h"
#include "emoeval/augment.h"
#include "emoeval/corpus.h"
#include "emoeval/dsp.h"
#include "emoeval/error.h"
#include "emoeval/hash.h"
#include "emoeval/hcm.h"
#include "emoeval/privacy.h"
#include "emoeval/rng.h"

namespace emoeval {
namespace cli {

const char* const kToolName = "emoeval";
const char* const kVersion = "1.0.0";
const char* const kSeedEnvVar = "EMOEVAL_SEED";

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const std::vector<std::string>& Commands() {
  static const std::vector<std::string> kCommands = {
      "augment", "features", "train", "attack", "eval-hcm", "eval-privacy", "report"};
  return kCommands;
}

namespace {

struct Context {
  std::string base_dir;
  uint64_t seed = 0;
};

void CheckKeys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
T Get(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T GetOr(const json& j, const std::string& key, const T& fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return Get<T>(j, key, where);
}

std::string Resolve(const Context& ctx, const std::string& p) {
  return corpus::ResolvePath(ctx.base_dir, p);
}

std::string OutputDir(const json& cfg, const Context& ctx, const std::string& where) {
  const std::string dir = Resolve(ctx, Get<std::string>(cfg, "output_dir", where));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

std::string Join(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

augment::AugmentInput LoadSample(const corpus::Manifest& m, const corpus::Utterance& u) {
  augment::AugmentInput in;
  in.id = u.id;
  in.audio = dsp::ReadWav(corpus::ResolvePath(m.base_dir, u.audio_path));
  in.transcript = u.transcript;
  in.alignments = u.word_alignments;
  return in;
}

privacy::RepresentationSet ToRepresentations(const DataFile& d) {
  privacy::RepresentationSet r;
  r.vectors = d.data.x;
  r.labels["label"] = d.data.labels;
  if (!d.data.adversary_labels.empty()) r.labels["adversary"] = d.data.adversary_labels;
  if (!d.speakers.empty()) r.labels["speaker"] = d.speakers;
  if (!d.genders.empty()) r.labels["gender"] = d.genders;
  return r;
}

// ---------------------------------------------------------------- augment

ojson CmdAugment(const json& cfg, const Context& ctx) {
  const std::string where = "augment config";
  CheckKeys(cfg, {"manifest", "plan", "output_dir", "seed"}, where);
  const corpus::Manifest manifest =
      corpus::LoadManifest(Resolve(ctx, Get<std::string>(cfg, "manifest", where)));
  if (!cfg.contains("plan") || !cfg["plan"].is_array() || cfg["plan"].empty()) {
    throw ConfigError(where + ": 'plan' must be a non-empty list of noise specs");
  }
  // A plan item is either a bare noise spec, applied to every utterance, or
  // {"id": ..., "spec": {...}} naming one utterance.
  struct PlanItem {
    std::optional<std::string> id;
    augment::NoiseSpec spec;
  };
  std::vector<PlanItem> plan;
  for (const auto& item : cfg["plan"]) {
    if (item.is_object() && item.contains("spec")) {
      CheckKeys(item, {"id", "spec"}, where + " plan record");
      plan.push_back({Get<std::string>(item, "id", where + " plan record"),
                      augment::SpecFromJson(item["spec"])});
    } else {
      plan.push_back({std::nullopt, augment::SpecFromJson(item)});
    }
  }
  std::set<std::string> known_ids;
  for (const auto& u : manifest.entries) known_ids.insert(u.id);
  for (const auto& item : plan) {
    if (item.id && !known_ids.count(*item.id)) {
      throw ConfigError(where + ": plan names unknown utterance '" + *item.id + "'");
    }
  }
  const std::string out_dir = OutputDir(cfg, ctx, where);
  fs::create_directories(fs::path(out_dir) / "audio");

  const auto loader = augment::CachingWavLoader(ctx.base_dir);
  const augment::PerceptionTable table;
  corpus::Manifest out_manifest;
  ojson records = ojson::array();
  ojson skipped = ojson::array();
  for (const auto& u : manifest.entries) {
    const augment::AugmentInput input = LoadSample(manifest, u);
    for (const auto& item : plan) {
      if (item.id && *item.id != u.id) continue;
      const augment::NoiseSpec& spec = item.spec;
      const std::string category = augment::CategoryName(spec.category);
      augment::AugmentResult res;
      try {
        res = augment::Apply(input, spec, ctx.seed, loader, table);
      } catch (const UnsupportedOpError& e) {
        skipped.push_back({{"id", u.id}, {"category", category}, {"reason", e.what()}});
        continue;
      }
      const std::string new_id = u.id + "__" + res.spec_hash;
      corpus::Utterance out = u;
      out.id = new_id;
      out.audio_path = "audio/" + new_id + ".wav";
      out.transcript_path = "audio/" + new_id + ".txt";
      out.alignment_path = res.edit.alignments ? "audio/" + new_id + ".ali" : "";
      out.duration_s = res.edit.audio.duration_s();
      out.transcript = res.edit.transcript;
      out.word_alignments = res.edit.alignments;
      out.tags["source_id"] = u.id;
      out.tags["noise"] = category;
      out.tags["perception"] = augment::PerceptionName(res.perception);
      dsp::WriteWav(res.edit.audio, (fs::path(out_dir) / out.audio_path).string());
      {
        std::ofstream t(fs::path(out_dir) / out.transcript_path);
        if (!t) throw IoError("cannot write transcript for " + new_id);
        t << Join(res.edit.transcript) << '\n';
      }
      if (res.edit.alignments) {
        corpus::WriteAlignmentFile(*res.edit.alignments,
                                   (fs::path(out_dir) / out.alignment_path).string());
      }
      ojson rec;
      rec["id"] = new_id;
      rec["source_id"] = u.id;
      rec["category"] = category;
      rec["spec"] = augment::SpecToJson(spec);
      rec["spec_hash"] = res.spec_hash;
      rec["sample_seed"] = res.seed;
      rec["perception"] = augment::PerceptionName(res.perception);
      rec["measured_snr_db"] =
          res.measured_snr_db ? ojson(*res.measured_snr_db) : ojson(nullptr);
      rec["num_samples"] = res.edit.audio.samples.size();
      rec["audio_path"] = out.audio_path;
      records.push_back(rec);
      out_manifest.entries.push_back(std::move(out));
    }
  }
  corpus::SaveManifest(out_manifest, (fs::path(out_dir) / "manifest.jsonl").string());
  {
    std::ofstream side(fs::path(out_dir) / "augment_sidecar.jsonl");
    if (!side) throw IoError("cannot write augmentation sidecar in " + out_dir);
    for (const auto& r : records) side << r.dump() << '\n';
  }
  ojson results;
  results["inputs"] = manifest.entries.size();
  results["outputs"] = records.size();
  results["manifest"] = "manifest.jsonl";
  results["records"] = records;
  results["skipped"] = skipped;
  return results;
}

// ---------------------------------------------------------------- features

ojson CmdFeatures(const json& cfg, const Context& ctx) {
  const std::string where = "features config";
  CheckKeys(cfg, {"manifest", "output_dir", "normalize", "dtype", "pooled", "seed"}, where);
  const corpus::Manifest manifest =
      corpus::LoadManifest(Resolve(ctx, Get<std::string>(cfg, "manifest", where)));
  const std::string normalize = GetOr<std::string>(cfg, "normalize", "none", where);
  if (normalize != "none" && normalize != "speaker" && normalize != "session") {
    throw ConfigError(where + ": normalize must be none, speaker or session");
  }
  const std::string dtype_name = GetOr<std::string>(cfg, "dtype", "f32", where);
  if (dtype_name != "f32" && dtype_name != "f64") {
    throw ConfigError(where + ": dtype must be f32 or f64");
  }
  const dsp::DumpType dtype =
      dtype_name == "f32" ? dsp::DumpType::kFloat32 : dsp::DumpType::kFloat64;
  const std::string out_dir = OutputDir(cfg, ctx, where);
  fs::create_directories(fs::path(out_dir) / "mfb");

  std::vector<dsp::FeatureMatrix> feats;
  std::vector<std::string> groups;
  for (const auto& u : manifest.entries) {
    feats.push_back(
        dsp::ExtractMfb(dsp::ReadWav(corpus::ResolvePath(manifest.base_dir, u.audio_path))));
    groups.push_back(normalize == "session" ? u.session_id : u.speaker_id);
  }
  if (normalize != "none") dsp::ZNormalize(&feats, groups);

  ojson items = ojson::array();
  for (size_t i = 0; i < feats.size(); ++i) {
    const std::string rel = "mfb/" + manifest.entries[i].id + ".mfb";
    dsp::WriteFeatureMatrix(feats[i], (fs::path(out_dir) / rel).string(), dtype);
    items.push_back({{"id", manifest.entries[i].id},
                     {"frames", feats[i].num_frames},
                     {"dim", feats[i].dim},
                     {"path", rel}});
  }
  ojson results;
  results["count"] = feats.size();
  results["normalize"] = normalize;
  results["dtype"] = dtype_name;
  results["features"] = items;

  if (cfg.contains("pooled")) {
    const json& p = cfg["pooled"];
    const std::string pw = where + " pooled";
    CheckKeys(p, {"label_tag", "classes", "adversary_tag", "adversary_classes", "output"}, pw);
    const auto label_tag = Get<std::string>(p, "label_tag", pw);
    const auto classes = Get<std::vector<std::string>>(p, "classes", pw);
    const auto adv_tag = GetOr<std::string>(p, "adversary_tag", "", pw);
    const auto adv_classes = GetOr<std::vector<std::string>>(p, "adversary_classes", {}, pw);
    const auto output = GetOr<std::string>(p, "output", "pooled.jsonl", pw);
    auto index_of = [](const std::vector<std::string>& names, const std::string& v,
                       const std::string& what) {
      for (size_t i = 0; i < names.size(); ++i) {
        if (names[i] == v) return static_cast<int>(i);
      }
      throw ConfigError("features: " + what + " value '" + v + "' is not a listed class");
    };
    std::set<std::string> speaker_names;
    for (const auto& u : manifest.entries) speaker_names.insert(u.speaker_id);
    std::map<std::string, int> speaker_index;
    for (const auto& s : speaker_names) speaker_index.emplace(s, speaker_index.size());

    DataFile df;
    df.data.x.resize(static_cast<Eigen::Index>(feats.size()),
                     static_cast<Eigen::Index>(2 * feats.front().dim));
    for (size_t i = 0; i < feats.size(); ++i) {
      const auto& u = manifest.entries[i];
      const auto pooled = dsp::PoolMeanStd(feats[i]);
      for (size_t d = 0; d < pooled.size(); ++d) {
        df.data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = pooled[d];
      }
      df.ids.push_back(u.id);
      auto tag = u.tags.find(label_tag);
      if (tag == u.tags.end()) throw ConfigError("features: " + u.id + " has no tag " + label_tag);
      df.data.labels.push_back(index_of(classes, tag->second, label_tag));
      if (!adv_tag.empty()) {
        auto at = u.tags.find(adv_tag);
        if (at == u.tags.end()) throw ConfigError("features: " + u.id + " has no tag " + adv_tag);
        df.data.adversary_labels.push_back(index_of(adv_classes, at->second, adv_tag));
      }
      df.speakers.push_back(speaker_index.at(u.speaker_id));
    }
    WriteDataFile((fs::path(out_dir) / output).string(), df);
    results["pooled"] = {{"path", output}, {"rows", feats.size()}, {"dim", df.data.x.cols()}};
  }
  return results;
}

// ---------------------------------------------------------------- train

std::set<nn::LossTerm> ParseTerms(const json& cfg, const std::string& where) {
  const bool has_terms = cfg.contains("loss_terms");
  const bool has_comp = cfg.contains("composition");
  if (has_terms && has_comp) {
    throw ConfigError(where + ": give either loss_terms or composition, not both");
  }
  if (has_comp) {
    static const std::map<std::string, std::set<nn::LossTerm>> kComps = {
        {"plain", {nn::LossTerm::kCrossEntropyPrimary}},
        {"gz_only", {nn::LossTerm::kHcmGz}},
        {"ce_gz", {nn::LossTerm::kCrossEntropyPrimary, nn::LossTerm::kHcmGz}},
        {"sir_only", {nn::LossTerm::kHcmSir}},
        {"adv_sir", {nn::LossTerm::kAdversaryCeReversed, nn::LossTerm::kHcmSir}},
        {"full",
         {nn::LossTerm::kCrossEntropyPrimary, nn::LossTerm::kAdversaryCeReversed,
          nn::LossTerm::kHcmGz, nn::LossTerm::kHcmSir}},
    };
    const auto name = Get<std::string>(cfg, "composition", where);
    auto it = kComps.find(name);
    if (it == kComps.end()) throw ConfigError(where + ": unknown composition '" + name + "'");
    return it->second;
  }
  std::set<nn::LossTerm> terms;
  for (const auto& t : GetOr<std::vector<std::string>>(
           cfg, "loss_terms", {"cross_entropy_primary"}, where)) {
    terms.insert(nn::ParseLossTerm(t));
  }
  return terms;
}

nn::TrainConfig ParseTrainSettings(const json& cfg, const std::string& where) {
  nn::TrainConfig tc;
  if (cfg.contains("optimizer")) {
    const json& o = cfg["optimizer"];
    CheckKeys(o, {"lr", "decay", "eps"}, where + " optimizer");
    tc.optimizer.lr = GetOr<double>(o, "lr", tc.optimizer.lr, where);
    tc.optimizer.decay = GetOr<double>(o, "decay", tc.optimizer.decay, where);
    tc.optimizer.eps = GetOr<double>(o, "eps", tc.optimizer.eps, where);
  }
  tc.max_epochs = GetOr<int>(cfg, "max_epochs", tc.max_epochs, where);
  tc.patience = GetOr<int>(cfg, "patience", tc.patience, where);
  tc.batch_size = GetOr<int>(cfg, "batch_size", tc.batch_size, where);
  tc.chance_tolerance = GetOr<double>(cfg, "chance_tolerance", tc.chance_tolerance, where);
  tc.objective.class_weights = GetOr<std::vector<double>>(cfg, "class_weights", {}, where);
  tc.objective.adversary_class_weights =
      GetOr<std::vector<double>>(cfg, "adversary_class_weights", {}, where);
  return tc;
}

nn::Vector WordlistWeights(const std::vector<std::string>& vocab, const hcm::Wordlist& list) {
  std::map<std::string, double> weights;
  for (const auto& e : list.entries) weights.emplace(hcm::CaseFold(e.word), e.weight);
  nn::Vector w = nn::Vector::Zero(static_cast<Eigen::Index>(vocab.size()));
  for (size_t i = 0; i < vocab.size(); ++i) {
    auto it = weights.find(hcm::CaseFold(vocab[i]));
    if (it != weights.end()) w(static_cast<Eigen::Index>(i)) = it->second;
  }
  return w;
}

ojson CmdTrain(const json& cfg, const Context& ctx) {
  const std::string where = "train config";
  CheckKeys(cfg,
            {"train_data", "val_data", "graph", "optimizer", "max_epochs", "patience",
             "batch_size", "class_weights", "adversary_class_weights", "chance_tolerance",
             "loss_terms", "composition", "hcm", "saliency", "embeddings", "output_dir", "seed"},
            where);
  const DataFile train = ReadDataFile(Resolve(ctx, Get<std::string>(cfg, "train_data", where)));
  const DataFile val = ReadDataFile(Resolve(ctx, Get<std::string>(cfg, "val_data", where)));
  if (!cfg.contains("graph")) throw ConfigError(where + ": missing required key 'graph'");
  const nn::GraphSpec spec = nn::SpecFromJson(cfg["graph"]);
  nn::TrainConfig tc = ParseTrainSettings(cfg, where);
  tc.seed = DeriveSeed(ctx.seed, "train");
  tc.objective.terms = ParseTerms(cfg, where);

  const bool needs_hcm = tc.objective.terms.count(nn::LossTerm::kHcmGz) ||
                         tc.objective.terms.count(nn::LossTerm::kHcmSir);
  std::vector<std::string> vocab;
  if (cfg.contains("hcm")) {
    const json& h = cfg["hcm"];
    const std::string hw = where + " hcm";
    CheckKeys(h, {"vocab", "gz_wordlist", "sir_wordlist", "alpha", "beta"}, hw);
    vocab = ReadLines(Resolve(ctx, Get<std::string>(h, "vocab", hw)));
    if (static_cast<int>(vocab.size()) != spec.input_dim) {
      throw ConfigError(hw + ": vocabulary size differs from the graph input dimension");
    }
    tc.objective.hcm.alpha = GetOr<double>(h, "alpha", 1.0, hw);
    tc.objective.hcm.beta = GetOr<double>(h, "beta", 1.0, hw);
    if (h.contains("gz_wordlist")) {
      tc.objective.hcm.gz_weights = WordlistWeights(
          vocab, hcm::ReadWordlist(Resolve(ctx, Get<std::string>(h, "gz_wordlist", hw))));
    }
    if (h.contains("sir_wordlist")) {
      tc.objective.hcm.sir_weights = WordlistWeights(
          vocab, hcm::ReadWordlist(Resolve(ctx, Get<std::string>(h, "sir_wordlist", hw))));
    }
  } else if (needs_hcm) {
    throw ConfigError(where + ": hcm loss terms need an 'hcm' section");
  }

  const std::string out_dir = OutputDir(cfg, ctx, where);
  const nn::ModelGraph init(spec, DeriveSeed(ctx.seed, "init"));
  const nn::TrainResult res = nn::Train(init, train.data, val.data, tc);

  // Output locations and the spelling of the loss do not change the model.
  json hashed = cfg;
  for (const char* k : {"output_dir", "embeddings", "saliency", "composition"}) hashed.erase(k);
  hashed["loss_terms"] = json::array();
  for (auto t : tc.objective.terms) hashed["loss_terms"].push_back(nn::LossTermName(t));
  std::ostringstream hash_src;
  hash_src << hashed.dump() << '#' << ctx.seed;
  const std::string model_hash = HexDigest(Fnv1a64(hash_src.str()));
  nn::SaveCheckpoint((fs::path(out_dir) / "model.ckpt").string(), res.graph, model_hash);
  nn::WriteHistory((fs::path(out_dir) / "history.jsonl").string(), res.history);

  ojson results;
  ojson terms = ojson::array();
  for (auto t : tc.objective.terms) terms.push_back(nn::LossTermName(t));
  results["loss_terms"] = terms;
  results["checkpoint"] = "model.ckpt";
  results["history"] = "history.jsonl";
  results["model_hash"] = model_hash;
  results["epochs_run"] = res.history.size();
  results["best_epoch"] = res.best_epoch;
  results["adversary_rule_unmet"] = res.adversary_rule_unmet;
  results["val_primary_uar"] = nn::PrimaryUar(res.graph, val.data);
  if (res.graph.has_adversary() && !val.data.adversary_labels.empty()) {
    results["val_adversary_uar"] = nn::AdversaryUar(res.graph, val.data);
  }
  ojson hist = ojson::array();
  for (const auto& r : res.history) hist.push_back(nn::EpochToJson(r));
  results["epochs"] = hist;

  if (cfg.contains("saliency")) {
    const json& s = cfg["saliency"];
    const std::string sw = where + " saliency";
    CheckKeys(s, {"data", "vocab", "classes", "steps", "normalize", "output"}, sw);
    const DataFile d = ReadDataFile(Resolve(ctx, Get<std::string>(s, "data", sw)));
    std::vector<std::string> words = vocab;
    if (s.contains("vocab")) words = ReadLines(Resolve(ctx, Get<std::string>(s, "vocab", sw)));
    if (static_cast<int>(words.size()) != spec.input_dim) {
      throw ConfigError(sw + ": vocabulary size differs from the graph input dimension");
    }
    const auto classes = Get<std::vector<std::string>>(s, "classes", sw);
    if (static_cast<int>(classes.size()) != spec.primary.n_classes) {
      throw ConfigError(sw + ": class name count differs from the primary head");
    }
    const int steps = GetOr<int>(s, "steps", 512, sw);
    const bool normalize = GetOr<bool>(s, "normalize", true, sw);
    const std::string output = GetOr<std::string>(s, "output", "saliency.jsonl", sw);
    std::vector<hcm::SaliencyRecord> recs;
    const std::vector<int> preds = res.graph.PredictPrimary(d.data.x);
    for (Eigen::Index i = 0; i < d.data.x.rows(); ++i) {
      const nn::Vector x = d.data.x.row(i).transpose();
      const nn::Vector attr =
          nn::IntegratedGradients(res.graph, x, nn::Vector::Zero(x.size()), steps, preds[i]);
      auto rec = nn::SaliencyPerWord(d.ids[i], attr, x, words, normalize);
      rec.predicted = classes[preds[i]];
      recs.push_back(std::move(rec));
    }
    hcm::WriteSaliency((fs::path(out_dir) / output).string(), recs);
    results["saliency"] = {{"path", output}, {"samples", recs.size()}, {"steps", steps}};
  }

  if (cfg.contains("embeddings")) {
    ojson dumps = ojson::array();
    for (const auto& e : cfg["embeddings"]) {
      const std::string ew = where + " embeddings";
      CheckKeys(e, {"data", "output"}, ew);
      const DataFile d = ReadDataFile(Resolve(ctx, Get<std::string>(e, "data", ew)));
      privacy::RepresentationSet r = ToRepresentations(d);
      r.vectors = res.graph.Embed(d.data.x);
      r.provenance = model_hash;
      const std::string output = Get<std::string>(e, "output", ew);
      privacy::SaveRepresentations((fs::path(out_dir) / output).string(), r);
      dumps.push_back({{"path", output}, {"rows", r.vectors.rows()}, {"dim", r.vectors.cols()}});
    }
    results["embeddings"] = dumps;
  }
  return results;
}

// ---------------------------------------------------------------- attack

ojson CmdAttack(const json& cfg, const Context& ctx) {
  const std::string where = "attack config";
  CheckKeys(cfg,
            {"manifest", "model", "noise_pool", "pool_mode", "budget", "ordering",
             "known_degradation", "max_drop_db", "coarse_levels", "runs", "variation",
             "reference_db", "output_dir", "seed"},
            where);
  const corpus::Manifest manifest =
      corpus::LoadManifest(Resolve(ctx, Get<std::string>(cfg, "manifest", where)));
  const std::string out_dir = OutputDir(cfg, ctx, where);

  attack::AttackConfig ac;
  if (cfg.contains("noise_pool")) {
    ac.noise_pool.clear();
    for (const auto& n : Get<std::vector<std::string>>(cfg, "noise_pool", where)) {
      ac.noise_pool.push_back(augment::ParseCategory(n));
    }
  }
  ac.pool_mode = attack::ParsePoolMode(GetOr<std::string>(cfg, "pool_mode", "all_noises", where));
  if (cfg.contains("budget")) {
    ac.budget = cfg["budget"].is_null() ? std::nullopt
                                        : std::optional<int>(Get<int>(cfg, "budget", where));
  }
  const std::string ordering = GetOr<std::string>(cfg, "ordering", "random", where);
  if (ordering == "random") {
    ac.ordering = attack::Ordering::kRandom;
  } else if (ordering == "known_degradation") {
    ac.ordering = attack::Ordering::kKnownDegradation;
  } else {
    throw ConfigError(where + ": ordering must be random or known_degradation");
  }
  for (const auto& [name, v] :
       GetOr<std::map<std::string, double>>(cfg, "known_degradation", {}, where)) {
    ac.known_degradation[augment::ParseCategory(name)] = v;
  }
  ac.max_drop_db = GetOr<int>(cfg, "max_drop_db", ac.max_drop_db, where);
  ac.coarse_levels = GetOr<std::vector<int>>(cfg, "coarse_levels", ac.coarse_levels, where);
  ac.runs = GetOr<int>(cfg, "runs", ac.runs, where);
  attack::ValidateConfig(ac);

  attack::VariationRanges ranges;
  if (cfg.contains("variation")) {
    const json& v = cfg["variation"];
    const std::string vw = where + " variation";
    CheckKeys(v, {"assets", "env_snr_db", "utt_speed_factors", "semitones_per_step"}, vw);
    for (const auto& [name, list] :
         GetOr<std::map<std::string, std::vector<std::string>>>(v, "assets", {}, vw)) {
      ranges.assets[augment::ParseCategory(name)] = list;
    }
    ranges.env_snr_db = GetOr<std::vector<double>>(v, "env_snr_db", ranges.env_snr_db, vw);
    ranges.utt_speed_factors =
        GetOr<std::vector<double>>(v, "utt_speed_factors", ranges.utt_speed_factors, vw);
    ranges.semitones_per_step =
        GetOr<double>(v, "semitones_per_step", ranges.semitones_per_step, vw);
  }
  // Categories whose assets are not configured cannot be sampled.
  std::vector<augment::NoiseCategory> pool;
  ojson dropped = ojson::array();
  for (auto c : ac.noise_pool) {
    if (attack::SamplerSupports(ranges, c)) {
      pool.push_back(c);
    } else {
      dropped.push_back(augment::CategoryName(c));
    }
  }
  ac.noise_pool = pool;

  if (!cfg.contains("model")) throw ConfigError(where + ": missing required key 'model'");
  const json& mcfg = cfg["model"];
  const std::string mw = where + " model";
  CheckKeys(mcfg, {"command", "checkpoint", "classes"}, mw);
  attack::BlackBoxModel::PredictFn predict;
  if (mcfg.contains("command")) {
    if (mcfg.contains("checkpoint")) throw ConfigError(mw + ": give command or checkpoint");
    std::string command = Get<std::string>(mcfg, "command", mw);
    const std::string resolved = Resolve(ctx, command);
    if (fs::exists(resolved)) command = resolved;
    fs::create_directories(fs::path(out_dir) / "scratch");
    predict = attack::SubprocessAdapter(command, (fs::path(out_dir) / "scratch").string());
  } else {
    const nn::Checkpoint ck =
        nn::LoadCheckpoint(Resolve(ctx, Get<std::string>(mcfg, "checkpoint", mw)));
    const auto classes = Get<std::vector<std::string>>(mcfg, "classes", mw);
    if (static_cast<int>(classes.size()) != ck.graph.spec().primary.n_classes) {
      throw ConfigError(mw + ": class name count differs from the checkpoint");
    }
    predict = [g = ck.graph, classes](const dsp::Waveform& w) {
      const auto pooled = dsp::PoolMeanStd(dsp::ExtractMfb(w));
      nn::Matrix x(1, static_cast<Eigen::Index>(pooled.size()));
      for (size_t d = 0; d < pooled.size(); ++d) x(0, static_cast<Eigen::Index>(d)) = pooled[d];
      return classes[g.PredictPrimary(x)[0]];
    };
  }
  attack::BlackBoxModel model(predict);

  std::vector<augment::AugmentInput> samples;
  for (const auto& u : manifest.entries) samples.push_back(LoadSample(manifest, u));
  const auto loader = augment::CachingWavLoader(ctx.base_dir);
  const double reference_db = GetOr<double>(cfg, "reference_db", 20.0, where);
  const auto agg = attack::Aggregate(&model, samples, ac, ctx.seed, attack::DefaultSampler(ranges),
                                     attack::ResidualPerturber(loader, reference_db, ctx.seed));

  ojson records = ojson::array();
  {
    std::ofstream rec_out(fs::path(out_dir) / "attack_records.jsonl");
    if (!rec_out) throw IoError("cannot write attack records in " + out_dir);
    for (const auto& r : agg.records) {
      const ojson j = attack::RecordToJson(r);
      rec_out << j.dump() << '\n';
      records.push_back(j);
    }
  }
  ojson per_sample = ojson::array();
  for (size_t i = 0; i < samples.size(); ++i) {
    per_sample.push_back({{"id", samples[i].id}, {"success_rate", agg.per_sample[i]}});
  }
  ojson results;
  results["pool_mode"] = attack::PoolModeName(ac.pool_mode);
  results["budget"] = ac.budget ? ojson(*ac.budget) : ojson(nullptr);
  results["unsampled_categories"] = dropped;
  results["success_rate"] = agg.success_rate;
  results["robustness"] = agg.robustness;
  results["queries_total"] = model.query_counter();
  results["per_sample"] = per_sample;
  results["records"] = records;
  return results;
}

// ---------------------------------------------------------------- eval-hcm

ojson CmdEvalHcm(const json& cfg, const Context& ctx) {
  const std::string where = "eval-hcm config";
  CheckKeys(cfg,
            {"saliency", "wordlist", "kind", "mode", "normalization", "pairwise_variant",
             "baseline_saliency", "output_dir", "seed"},
            where);
  const auto records = hcm::ReadSaliency(Resolve(ctx, Get<std::string>(cfg, "saliency", where)));
  const auto list = hcm::ReadWordlist(Resolve(ctx, Get<std::string>(cfg, "wordlist", where)));
  const std::string kind_name = GetOr<std::string>(cfg, "kind", "gz", where);
  const std::string mode_name = GetOr<std::string>(cfg, "mode", "combined", where);
  if (kind_name != "gz" && kind_name != "sir") throw ConfigError(where + ": kind must be gz or sir");
  if (mode_name != "combined" && mode_name != "pairwise") {
    throw ConfigError(where + ": mode must be combined or pairwise");
  }
  const auto kind = kind_name == "gz" ? hcm::ScoreKind::kGz : hcm::ScoreKind::kSir;
  const auto mode = mode_name == "combined" ? hcm::ScoreMode::kCombined : hcm::ScoreMode::kPairwise;
  hcm::ScoreOptions opts;
  const std::string norm = GetOr<std::string>(cfg, "normalization", "per_word", where);
  if (norm == "per_word") {
    opts.normalization = hcm::Normalization::kPerWord;
  } else if (norm == "unnormalized") {
    opts.normalization = hcm::Normalization::kUnnormalized;
  } else {
    throw ConfigError(where + ": normalization must be per_word or unnormalized");
  }
  const std::string variant = GetOr<std::string>(cfg, "pairwise_variant", "signed", where);
  if (variant == "signed") {
    opts.pairwise_variant = hcm::PairwiseVariant::kSigned;
  } else if (variant == "absolute") {
    opts.pairwise_variant = hcm::PairwiseVariant::kAbsolute;
  } else {
    throw ConfigError(where + ": pairwise_variant must be signed or absolute");
  }
  if (cfg.contains("output_dir")) OutputDir(cfg, ctx, where);

  ojson per_sample = ojson::array();
  std::map<std::string, double> scores;
  for (const auto& r : records) {
    const double v = hcm::SampleScore(r, list, kind, mode, opts);
    scores[r.sample_id] = v;
    per_sample.push_back({{"sample_id", r.sample_id}, {"value", v}});
  }
  const hcm::HcmScore ds = hcm::DatasetScore(records, list, kind, mode, opts);
  ojson results;
  results["kind"] = kind_name;
  results["mode"] = mode_name;
  results["normalization"] = norm;
  results["samples"] = records.size();
  results["value"] = ds.value;
  results["per_sample"] = per_sample;
  if (cfg.contains("baseline_saliency")) {
    const auto base =
        hcm::ReadSaliency(Resolve(ctx, Get<std::string>(cfg, "baseline_saliency", where)));
    std::map<std::string, double> orig;
    for (const auto& r : base) orig[r.sample_id] = hcm::SampleScore(r, list, kind, mode, opts);
    const auto rel = hcm::RelativeImprovement(scores, orig);
    results["relative_improvement"] = {
        {"value", rel.value}, {"used", rel.used}, {"skipped", rel.skipped}};
  }
  return results;
}

// ---------------------------------------------------------------- eval-privacy

privacy::AttackerConfig ParseAttacker(const json& cfg, const std::string& where, uint64_t seed) {
  privacy::AttackerConfig ac;
  ac.seed = DeriveSeed(seed, "attacker");
  if (!cfg.contains("attacker")) return ac;
  const json& a = cfg["attacker"];
  const std::string aw = where + " attacker";
  CheckKeys(a,
            {"depths", "widths", "optimizer", "max_epochs", "patience", "batch_size",
             "validation_fraction"},
            aw);
  ac.depths = GetOr<std::vector<int>>(a, "depths", ac.depths, aw);
  ac.widths = GetOr<std::vector<int>>(a, "widths", ac.widths, aw);
  ac.validation_fraction = GetOr<double>(a, "validation_fraction", ac.validation_fraction, aw);
  json train_part = json::object();
  for (const char* k : {"optimizer", "max_epochs", "patience", "batch_size"}) {
    if (a.contains(k)) train_part[k] = a[k];
  }
  ac.train = ParseTrainSettings(train_part, aw);
  privacy::ValidateAttackerConfig(ac);
  return ac;
}

ojson CmdEvalPrivacy(const json& cfg, const Context& ctx) {
  const std::string where = "eval-privacy config";
  CheckKeys(cfg,
            {"protocol", "attribute", "checkpoint", "data", "protected", "attacker_data",
             "attacker", "membership", "trainer", "output_dir", "seed"},
            where);
  const std::string protocol = Get<std::string>(cfg, "protocol", where);
  if (cfg.contains("output_dir")) OutputDir(cfg, ctx, where);
  ojson results;
  results["protocol"] = protocol;

  if (protocol == "leakage") {
    const nn::Checkpoint ck =
        nn::LoadCheckpoint(Resolve(ctx, Get<std::string>(cfg, "checkpoint", where)));
    const DataFile d = ReadDataFile(Resolve(ctx, Get<std::string>(cfg, "data", where)));
    if (d.data.adversary_labels.empty()) {
      throw ConfigError(where + ": leakage needs adversary labels in the data file");
    }
    results["attribute"] = GetOr<std::string>(cfg, "attribute", "adversary", where);
    results["uar"] = privacy::Leakage(ck.graph, d.data.x, d.data.adversary_labels);
    return results;
  }

  if (protocol == "sir") {
    const std::string attribute = GetOr<std::string>(cfg, "attribute", "adversary", where);
    const auto ac = ParseAttacker(cfg, where, ctx.seed);
    const std::string p1 = Resolve(ctx, Get<std::string>(cfg, "protected", where));
    const std::string p2 = Resolve(ctx, Get<std::string>(cfg, "attacker_data", where));
    privacy::AttackReport rep;
    if (cfg.contains("checkpoint")) {
      const nn::Checkpoint ck =
          nn::LoadCheckpoint(Resolve(ctx, Get<std::string>(cfg, "checkpoint", where)));
      rep = privacy::SirProtocol(privacy::GraphEmbedder(ck.graph),
                                 ToRepresentations(ReadDataFile(p1)),
                                 ToRepresentations(ReadDataFile(p2)), attribute, ac);
    } else {
      rep = privacy::AttackRepresentations(privacy::LoadRepresentations(p2),
                                           privacy::LoadRepresentations(p1), attribute, ac);
    }
    results["report"] = privacy::ReportToJson(rep);
    return results;
  }

  if (protocol == "membership") {
    const DataFile d = ReadDataFile(Resolve(ctx, Get<std::string>(cfg, "data", where)));
    if (d.speakers.empty()) throw ConfigError(where + ": membership needs speaker labels");
    privacy::MembershipConfig mc;
    mc.attacker = ParseAttacker(cfg, where, ctx.seed);
    mc.seed = DeriveSeed(ctx.seed, "membership");
    if (cfg.contains("membership")) {
      const json& m = cfg["membership"];
      const std::string mw = where + " membership";
      CheckKeys(m, {"selected_speaker_fraction", "added_sample_fraction"}, mw);
      mc.selected_speaker_fraction =
          GetOr<double>(m, "selected_speaker_fraction", mc.selected_speaker_fraction, mw);
      mc.added_sample_fraction =
          GetOr<double>(m, "added_sample_fraction", mc.added_sample_fraction, mw);
    }
    if (!cfg.contains("trainer")) throw ConfigError(where + ": missing required key 'trainer'");
    const json& t = cfg["trainer"];
    const std::string tw = where + " trainer";
    CheckKeys(t,
              {"graph", "speaker_adversary", "optimizer", "max_epochs", "patience",
               "batch_size", "validation_fraction"},
              tw);
    nn::GraphSpec spec = nn::SpecFromJson(Get<json>(t, "graph", tw));
    const bool speaker_adv = GetOr<bool>(t, "speaker_adversary", false, tw);
    const double val_frac = GetOr<double>(t, "validation_fraction", 0.2, tw);
    if (!(val_frac > 0.0 && val_frac < 1.0)) {
      throw ConfigError(tw + ": validation_fraction must be in (0, 1)");
    }
    json train_part = json::object();
    for (const char* k : {"optimizer", "max_epochs", "patience", "batch_size"}) {
      if (t.contains(k)) train_part[k] = t[k];
    }
    nn::TrainConfig tc = ParseTrainSettings(train_part, tw);
    const uint64_t seed = ctx.seed;
    privacy::Trainer trainer = [spec, speaker_adv, val_frac, tc,
                                seed](const privacy::RepresentationSet& tr) -> privacy::EmbedFn {
      const auto& spk = tr.labels.at("speaker");
      std::map<int, int> spk_index;
      for (int s : spk) spk_index.emplace(s, 0);
      int next = 0;
      for (auto& [s, idx] : spk_index) idx = next++;
      nn::GraphSpec gs = spec;
      nn::TrainConfig cfg2 = tc;
      cfg2.seed = DeriveSeed(seed, "membership/main/train");
      if (speaker_adv) {
        gs.adversary = gs.adversary.value_or(nn::HeadSpec{});
        gs.adversary->n_classes = std::max(2, next);
        cfg2.objective.terms.insert(nn::LossTerm::kAdversaryCeReversed);
      } else {
        gs.adversary.reset();
      }
      std::vector<size_t> rows(tr.vectors.rows());
      for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;
      Rng rng(DeriveSeed(seed, "membership/main/split"));
      rng.Shuffle(&rows);
      const size_t n_val = std::max<size_t>(1, static_cast<size_t>(val_frac * rows.size()));
      auto build = [&](size_t from, size_t to) {
        nn::Dataset d;
        d.x.resize(static_cast<Eigen::Index>(to - from), tr.vectors.cols());
        for (size_t k = from; k < to; ++k) {
          d.x.row(static_cast<Eigen::Index>(k - from)) =
              tr.vectors.row(static_cast<Eigen::Index>(rows[k]));
          d.labels.push_back(tr.labels.at("label")[rows[k]]);
          d.adversary_labels.push_back(spk_index.at(spk[rows[k]]));
        }
        return d;
      };
      const nn::Dataset val = build(0, n_val);
      const nn::Dataset train = build(n_val, rows.size());
      const nn::ModelGraph g(gs, DeriveSeed(seed, "membership/main/init"));
      const nn::TrainResult res = nn::Train(g, train, val, cfg2);
      return privacy::GraphEmbedder(res.graph);
    };
    const auto rep = privacy::MembershipProtocol(trainer, ToRepresentations(d),
                                                 privacy::SpeakerFolds(d.speakers, 5), mc);
    results["speaker_adversary"] = speaker_adv;
    results["report"] = privacy::MembershipToJson(rep);
    return results;
  }
  throw ConfigError(where + ": protocol must be leakage, sir or membership");
}

// ---------------------------------------------------------------- report

ojson CmdReport(const json& cfg, const Context& ctx) {
  const std::string where = "report config";
  CheckKeys(cfg, {"inputs", "output_dir", "seed"}, where);
  const auto inputs = Get<std::vector<std::string>>(cfg, "inputs", where);
  if (inputs.empty()) throw ConfigError(where + ": 'inputs' is empty");
  if (cfg.contains("output_dir")) OutputDir(cfg, ctx, where);
  ojson reports = ojson::array();
  std::map<std::string, int> by_command;
  for (const auto& p : inputs) {
    const std::string path = Resolve(ctx, p);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path);
    ojson r;
    try {
      r = ojson::parse(in);
    } catch (const json::exception& e) {
      throw IoError(path + ": " + e.what());
    }
    for (const char* k : {"tool", "version", "command", "config_hash", "seed", "results"}) {
      if (!r.contains(k)) throw IoError(path + ": not a report (missing '" + k + "')");
    }
    ++by_command[r["command"].get<std::string>()];
    ojson entry;
    entry["source"] = p;
    entry["command"] = r["command"];
    entry["version"] = r["version"];
    entry["config_hash"] = r["config_hash"];
    entry["seed"] = r["seed"];
    entry["results"] = r["results"];
    reports.push_back(entry);
  }
  ojson results;
  results["count"] = reports.size();
  results["by_command"] = by_command;
  results["reports"] = reports;
  return results;
}

}  // namespace

uint64_t ResolveSeed(const std::optional<uint64_t>& flag, const json& config) {
  if (flag) return *flag;
  if (config.contains("seed")) {
    try {
      return config["seed"].get<uint64_t>();
    } catch (const json::exception&) {
      throw ConfigError("config: seed must be a non-negative integer");
    }
  }
  if (const char* env = std::getenv(kSeedEnvVar)) {
    try {
      size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(std::string(kSeedEnvVar) + " must be a non-negative integer");
    }
  }
  return 0;
}

ojson Run(const Invocation& inv) {
  std::ifstream in(inv.config_path);
  if (!in) throw IoError("cannot open config: " + inv.config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(inv.config_path + ": " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError(inv.config_path + ": config must be a JSON object");
  Context ctx;
  ctx.base_dir = fs::path(inv.config_path).parent_path().string();
  ctx.seed = ResolveSeed(inv.seed, cfg);

  ojson results;
  if (inv.command == "augment") {
    results = CmdAugment(cfg, ctx);
  } else if (inv.command == "features") {
    results = CmdFeatures(cfg, ctx);
  } else if (inv.command == "train") {
    results = CmdTrain(cfg, ctx);
  } else if (inv.command == "attack") {
    results = CmdAttack(cfg, ctx);
  } else if (inv.command == "eval-hcm") {
    results = CmdEvalHcm(cfg, ctx);
  } else if (inv.command == "eval-privacy") {
    results = CmdEvalPrivacy(cfg, ctx);
  } else if (inv.command == "report") {
    results = CmdReport(cfg, ctx);
  } else {
    throw ConfigError("unknown command '" + inv.command + "'");
  }

  ojson report;
  report["tool"] = kToolName;
  report["version"] = kVersion;
  report["command"] = inv.command;
  report["config_hash"] = HexDigest(Fnv1a64(cfg.dump()));
  report["seed"] = ctx.seed;
  report["config"] = ojson::parse(cfg.dump());
  report["results"] = results;
  if (cfg.contains("output_dir")) {
    const fs::path out = fs::path(Resolve(ctx, cfg["output_dir"].get<std::string>())) /
                         "report.json";
    std::ofstream os(out);
    if (!os) throw IoError("cannot write report: " + out.string());
    os << RenderReport(report);
  }
  return report;
}

std::string RenderReport(const ojson& report) { return report.dump(2) + "\n"; }

ErrorInfo DescribeError(const std::exception& e) {
  ErrorInfo info;
  std::string type = "Error";
  if (dynamic_cast<const ConfigError*>(&e)) {
    type = "ConfigError";
    info.exit_code = 2;
  } else if (dynamic_cast<const IoError*>(&e)) {
    type = "IoError";
    info.exit_code = 3;
  } else if (dynamic_cast<const UndefinedMetricError*>(&e)) {
    type = "UndefinedMetricError";
    info.exit_code = 4;
  } else if (dynamic_cast<const DomainError*>(&e)) {
    type = "DomainError";
    info.exit_code = 4;
  } else if (dynamic_cast<const UnsupportedOpError*>(&e)) {
    type = "UnsupportedOpError";
    info.exit_code = 5;
  }
  info.body["error"] = {{"type", type}, {"message", e.what()}};
  return info;
}

DataFile ReadDataFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file: " + path);
  DataFile d;
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool any_adv = false, any_spk = false, any_gender = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string at = path + ":" + std::to_string(lineno);
    try {
      const json j = json::parse(line);
      for (const auto& [k, v] : j.items()) {
        static const std::set<std::string> kKeys = {"id",      "x",       "label",
                                                    "adversary", "speaker", "gender"};
        if (!kKeys.count(k)) throw IoError(at + ": unknown field '" + k + "'");
      }
      d.ids.push_back(j.at("id").get<std::string>());
      rows.push_back(j.at("x").get<std::vector<double>>());
      d.data.labels.push_back(j.at("label").get<int>());
      const bool first = rows.size() == 1;
      auto take = [&](const char* key, bool* seen, std::vector<int>* dst) {
        const bool has = j.contains(key);
        if (first) *seen = has;
        if (has != *seen) throw IoError(at + ": field '" + std::string(key) + "' is inconsistent");
        if (has) dst->push_back(j.at(key).get<int>());
      };
      take("adversary", &any_adv, &d.data.adversary_labels);
      take("speaker", &any_spk, &d.speakers);
      take("gender", &any_gender, &d.genders);
    } catch (const json::exception& e) {
      throw IoError(at + ": " + e.what());
    }
    if (rows.back().size() != rows.front().size()) {
      throw IoError(at + ": feature length differs from the first row");
    }
  }
  if (rows.empty()) throw IoError("data file has no rows: " + path);
  d.data.x.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t k = 0; k < rows[i].size(); ++k) {
      d.data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return d;
}

void WriteDataFile(const std::string& path, const DataFile& d) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write data file: " + path);
  for (Eigen::Index i = 0; i < d.data.x.rows(); ++i) {
    ojson j;
    j["id"] = d.ids[i];
    std::vector<double> x(d.data.x.cols());
    for (Eigen::Index k = 0; k < d.data.x.cols(); ++k) x[k] = d.data.x(i, k);
    j["x"] = x;
    j["label"] = d.data.labels[i];
    if (!d.data.adversary_labels.empty()) j["adversary"] = d.data.adversary_labels[i];
    if (!d.speakers.empty()) j["speaker"] = d.speakers[i];
    if (!d.genders.empty()) j["gender"] = d.genders[i];
    out << j.dump() << '\n';
  }
}

}  // namespace cli
}  // namespace emoeval
