// src/nn.cc

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

#include "emoeval/nn.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "emoeval/error.h"
#include "emoeval/evalstats.h"
#include "emoeval/rng.h"

namespace emoeval {
namespace nn {

namespace {

constexpr double kProbFloor = 1e-12;

void CheckWidths(const std::vector<int>& widths, const char* what) {
  for (int w : widths) {
    if (w <= 0) throw ConfigError(std::string(what) + ": layer widths must be positive");
  }
}

void CheckHead(const HeadSpec& h, const char* what) {
  CheckWidths(h.hidden, what);
  if (h.n_classes < 2) throw ConfigError(std::string(what) + ": need at least two classes");
}

LayerStack InitStack(int in_dim, const std::vector<int>& widths, Rng* rng) {
  LayerStack stack;
  int fan_in = in_dim;
  for (int out : widths) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer{Matrix(out, fan_in), Vector(out)};
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.w(r, c) = rng->Uniform(-bound, bound);
    }
    for (int r = 0; r < out; ++r) layer.b(r) = rng->Uniform(-bound, bound);
    stack.push_back(std::move(layer));
    fan_in = out;
  }
  return stack;
}

std::vector<int> HeadWidths(const HeadSpec& h) {
  std::vector<int> w = h.hidden;
  w.push_back(h.n_classes);
  return w;
}

StackCache StackForward(const LayerStack& stack, const Matrix& in, bool relu_last) {
  StackCache c;
  c.post.push_back(in);
  for (size_t l = 0; l < stack.size(); ++l) {
    Matrix z = c.post.back() * stack[l].w.transpose();
    z.rowwise() += stack[l].b.transpose();
    const bool relu = relu_last || l + 1 < stack.size();
    c.post.push_back(relu ? Matrix(z.cwiseMax(0.0)) : z);
    c.pre.push_back(std::move(z));
  }
  return c;
}

// Accumulates parameter gradients into `grads` and returns the input gradient.
Matrix StackBackward(const LayerStack& stack, const StackCache& c, Matrix d_out,
                     bool relu_last, LayerStack* grads) {
  for (size_t l = stack.size(); l-- > 0;) {
    const bool relu = relu_last || l + 1 < stack.size();
    if (relu) d_out = d_out.cwiseProduct((c.pre[l].array() > 0.0).cast<double>().matrix());
    (*grads)[l].w += d_out.transpose() * c.post[l];
    (*grads)[l].b += d_out.colwise().sum().transpose();
    d_out = d_out * stack[l].w;
  }
  return d_out;
}

LayerStack ZerosLike(const LayerStack& s) {
  LayerStack z;
  for (const auto& l : s) {
    z.push_back({Matrix::Zero(l.w.rows(), l.w.cols()), Vector::Zero(l.b.size())});
  }
  return z;
}

std::vector<int> RowArgmax(const Matrix& m) {
  std::vector<int> out(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::Index idx;
    m.row(r).maxCoeff(&idx);
    out[r] = static_cast<int>(idx);
  }
  return out;
}

double WeightOf(const std::vector<double>& w, int label) {
  return w.empty() ? 1.0 : w[label];
}

nlohmann::ordered_json HeadToJson(const HeadSpec& h) {
  nlohmann::ordered_json j;
  j["hidden"] = h.hidden;
  j["n_classes"] = h.n_classes;
  return j;
}

HeadSpec HeadFromJson(const nlohmann::json& j) {
  for (const auto& [k, v] : j.items()) {
    if (k != "hidden" && k != "n_classes") throw ConfigError("head spec: unknown key '" + k + "'");
  }
  HeadSpec h;
  if (j.contains("hidden")) h.hidden = j["hidden"].get<std::vector<int>>();
  h.n_classes = j.at("n_classes").get<int>();
  return h;
}

}  // namespace

void ValidateSpec(const GraphSpec& spec) {
  if (spec.input_dim <= 0) throw ConfigError("graph: input_dim must be positive");
  CheckWidths(spec.trunk, "trunk");
  CheckHead(spec.primary, "primary head");
  if (spec.adversary) CheckHead(*spec.adversary, "adversary head");
  if (!(spec.grl_lambda >= 0.0) || !std::isfinite(spec.grl_lambda)) {
    throw ConfigError("graph: grl_lambda must be finite and >= 0");
  }
}

nlohmann::ordered_json SpecToJson(const GraphSpec& spec) {
  nlohmann::ordered_json j;
  j["input_dim"] = spec.input_dim;
  j["trunk"] = spec.trunk;
  j["primary"] = HeadToJson(spec.primary);
  if (spec.adversary) j["adversary"] = HeadToJson(*spec.adversary);
  j["grl_lambda"] = spec.grl_lambda;
  return j;
}

GraphSpec SpecFromJson(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {"input_dim", "trunk", "primary", "adversary",
                                              "grl_lambda"};
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) throw ConfigError("graph spec: unknown key '" + k + "'");
  }
  GraphSpec s;
  try {
    s.input_dim = j.at("input_dim").get<int>();
    if (j.contains("trunk")) s.trunk = j["trunk"].get<std::vector<int>>();
    s.primary = HeadFromJson(j.at("primary"));
    if (j.contains("adversary") && !j["adversary"].is_null()) {
      s.adversary = HeadFromJson(j["adversary"]);
    }
    if (j.contains("grl_lambda")) s.grl_lambda = j["grl_lambda"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("graph spec: ") + e.what());
  }
  ValidateSpec(s);
  return s;
}

Vector Flatten(const Parameters& p) {
  size_t n = 0;
  for (const LayerStack* s : {&p.trunk, &p.primary, &p.adversary}) {
    for (const auto& l : *s) n += l.w.size() + l.b.size();
  }
  Vector flat(n);
  size_t off = 0;
  for (const LayerStack* s : {&p.trunk, &p.primary, &p.adversary}) {
    for (const auto& l : *s) {
      flat.segment(off, l.w.size()) = Eigen::Map<const Vector>(l.w.data(), l.w.size());
      off += l.w.size();
      flat.segment(off, l.b.size()) = l.b;
      off += l.b.size();
    }
  }
  return flat;
}

void Unflatten(const Vector& flat, Parameters* p) {
  size_t off = 0;
  for (LayerStack* s : {&p->trunk, &p->primary, &p->adversary}) {
    for (auto& l : *s) {
      if (off + l.w.size() + l.b.size() > static_cast<size_t>(flat.size())) {
        throw DomainError("unflatten: parameter vector too short");
      }
      Eigen::Map<Vector>(l.w.data(), l.w.size()) = flat.segment(off, l.w.size());
      off += l.w.size();
      l.b = flat.segment(off, l.b.size());
      off += l.b.size();
    }
  }
  if (off != static_cast<size_t>(flat.size())) {
    throw DomainError("unflatten: parameter vector too long");
  }
}

Matrix Softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    p.row(r) = (logits.row(r).array() - m).exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

ModelGraph::ModelGraph(const GraphSpec& spec, uint64_t seed) : spec_(spec) {
  ValidateSpec(spec_);
  Rng rng(seed);
  params_.trunk = InitStack(spec_.input_dim, spec_.trunk, &rng);
  const int emb = embedding_dim();
  params_.primary = InitStack(emb, HeadWidths(spec_.primary), &rng);
  if (spec_.adversary) params_.adversary = InitStack(emb, HeadWidths(*spec_.adversary), &rng);
}

void ModelGraph::set_grl_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("grl_lambda must be finite and >= 0");
  }
  spec_.grl_lambda = lambda;
}

int ModelGraph::embedding_dim() const {
  return spec_.trunk.empty() ? spec_.input_dim : spec_.trunk.back();
}

ForwardCache ModelGraph::Forward(const Matrix& x) const {
  if (x.cols() != spec_.input_dim) {
    throw DomainError("forward: input has " + std::to_string(x.cols()) +
                      " columns, graph expects " + std::to_string(spec_.input_dim));
  }
  if (!x.allFinite()) throw DomainError("forward: non-finite input");
  ForwardCache c;
  c.trunk = StackForward(params_.trunk, x, true);
  c.primary = StackForward(params_.primary, c.embedding(), false);
  c.primary_probs = Softmax(c.primary_logits());
  if (has_adversary()) {
    c.adversary = StackForward(params_.adversary, c.embedding(), false);
    c.adversary_probs = Softmax(c.adversary_logits());
  }
  return c;
}

Matrix ModelGraph::Embed(const Matrix& x) const {
  if (x.cols() != spec_.input_dim) throw DomainError("embed: input dimension mismatch");
  return StackForward(params_.trunk, x, true).post.back();
}

std::vector<int> ModelGraph::PredictPrimary(const Matrix& x) const {
  return RowArgmax(Forward(x).primary_logits());
}

std::vector<int> ModelGraph::PredictAdversary(const Matrix& x) const {
  if (!has_adversary()) throw ConfigError("graph has no adversary head");
  return RowArgmax(Forward(x).adversary_logits());
}

BackwardResult ModelGraph::Backward(const ForwardCache& cache, const Matrix& d_primary_logits,
                                    const Matrix* d_adversary_logits) const {
  const Eigen::Index n = cache.embedding().rows();
  if (d_primary_logits.rows() != n || d_primary_logits.cols() != spec_.primary.n_classes) {
    throw DomainError("backward: primary gradient shape mismatch");
  }
  BackwardResult r;
  r.grads.trunk = ZerosLike(params_.trunk);
  r.grads.primary = ZerosLike(params_.primary);
  r.grads.adversary = ZerosLike(params_.adversary);
  Matrix d_h = StackBackward(params_.primary, cache.primary, d_primary_logits, false,
                             &r.grads.primary);
  if (d_adversary_logits != nullptr) {
    if (!has_adversary()) throw ConfigError("backward: adversary gradient without a head");
    if (d_adversary_logits->rows() != n ||
        d_adversary_logits->cols() != spec_.adversary->n_classes) {
      throw DomainError("backward: adversary gradient shape mismatch");
    }
    Matrix d_h_adv = StackBackward(params_.adversary, cache.adversary, *d_adversary_logits,
                                   false, &r.grads.adversary);
    d_h -= spec_.grl_lambda * d_h_adv;
  }
  r.d_input = StackBackward(params_.trunk, cache.trunk, d_h, true, &r.grads.trunk);
  return r;
}

double WeightedCe(const Vector& probs, int label, const std::vector<double>& class_weights) {
  if (label < 0 || label >= probs.size()) throw DomainError("weighted ce: label out of range");
  if (!class_weights.empty() && class_weights.size() != static_cast<size_t>(probs.size())) {
    throw DomainError("weighted ce: class weight count mismatch");
  }
  return -WeightOf(class_weights, label) * std::log(std::max(probs(label), kProbFloor));
}

CeBatch WeightedCeBatch(const Matrix& probs, const std::vector<int>& labels,
                        const std::vector<double>& class_weights) {
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  if (n == 0 || probs.rows() < n) throw DomainError("weighted ce: batch shape mismatch");
  if (!class_weights.empty() && class_weights.size() != static_cast<size_t>(probs.cols())) {
    throw DomainError("weighted ce: class weight count mismatch");
  }
  CeBatch out;
  out.d_logits = Matrix::Zero(probs.rows(), probs.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= probs.cols()) throw DomainError("weighted ce: label out of range");
    const double w = WeightOf(class_weights, y);
    const double p = probs(i, y);
    out.loss -= w * std::log(std::max(p, kProbFloor));
    // d(-w log p_y)/dz = w (p - onehot); the clamp zeroes it below the floor.
    if (p > kProbFloor) {
      out.d_logits.row(i) = w * probs.row(i);
      out.d_logits(i, y) -= w;
    }
  }
  out.loss /= static_cast<double>(n);
  out.d_logits /= static_cast<double>(n);
  return out;
}

void RmspropStep(Vector* params, const Vector& grads, Vector* state, const RmspropConfig& cfg) {
  if (params->size() != grads.size() || state->size() != grads.size()) {
    throw DomainError("rmsprop: size mismatch");
  }
  *state = cfg.decay * state->array() + (1.0 - cfg.decay) * grads.array().square();
  *params -= (cfg.lr * grads.array() / (state->array() + cfg.eps).sqrt()).matrix();
}

std::string LossTermName(LossTerm t) {
  switch (t) {
    case LossTerm::kCrossEntropyPrimary: return "cross_entropy_primary";
    case LossTerm::kAdversaryCeReversed: return "adversary_ce_reversed";
    case LossTerm::kHcmGz: return "hcm_gz";
    case LossTerm::kHcmSir: return "hcm_sir";
  }
  return "";
}

LossTerm ParseLossTerm(const std::string& s) {
  for (LossTerm t : {LossTerm::kCrossEntropyPrimary, LossTerm::kAdversaryCeReversed,
                     LossTerm::kHcmGz, LossTerm::kHcmSir}) {
    if (LossTermName(t) == s) return t;
  }
  throw ConfigError("unknown loss term '" + s + "'");
}

void ValidateDataset(const Dataset& d, const GraphSpec& spec, bool need_adversary) {
  if (d.x.rows() == 0) throw DomainError("dataset: no samples");
  if (d.x.cols() != spec.input_dim) throw DomainError("dataset: input dimension mismatch");
  if (static_cast<Eigen::Index>(d.labels.size()) != d.x.rows()) {
    throw DomainError("dataset: label count mismatch");
  }
  for (int y : d.labels) {
    if (y < 0 || y >= spec.primary.n_classes) throw DomainError("dataset: label out of range");
  }
  if (need_adversary) {
    if (!spec.adversary) throw ConfigError("adversary loss requested without an adversary head");
    if (static_cast<Eigen::Index>(d.adversary_labels.size()) != d.x.rows()) {
      throw ConfigError("dataset: adversary labels missing or incomplete");
    }
    for (int a : d.adversary_labels) {
      if (a < 0 || a >= spec.adversary->n_classes) {
        throw DomainError("dataset: adversary label out of range");
      }
    }
  }
}

ObjectiveResult EvaluateObjective(const ModelGraph& g, const Matrix& x,
                                  const std::vector<int>& labels,
                                  const std::vector<int>& adversary_labels,
                                  const Objective& obj) {
  const auto& spec = g.spec();
  const Eigen::Index n = x.rows();
  const bool use_ce = obj.terms.count(LossTerm::kCrossEntropyPrimary) > 0;
  const bool use_adv = obj.terms.count(LossTerm::kAdversaryCeReversed) > 0;
  const bool use_gz = obj.terms.count(LossTerm::kHcmGz) > 0;
  const bool use_sir = obj.terms.count(LossTerm::kHcmSir) > 0;
  if (use_adv && !g.has_adversary()) {
    throw ConfigError("adversary loss requested without an adversary head");
  }
  if (use_gz && obj.hcm.gz_weights.size() != spec.input_dim) {
    throw ConfigError("hcm_gz needs one wordlist weight per input dimension");
  }
  if (use_sir && obj.hcm.sir_weights.size() != spec.input_dim) {
    throw ConfigError("hcm_sir needs one wordlist weight per input dimension");
  }

  // Occluded copies of each sample, one per listed word it contains.
  struct Occlusion {
    Eigen::Index sample;
    Eigen::Index word;
    Eigen::Index row;
  };
  std::vector<Occlusion> occl;
  std::vector<int> predicted;
  Matrix xa = x;
  if (use_gz || use_sir) {
    predicted = g.PredictPrimary(x);
    std::vector<Eigen::Index> words;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index w = 0; w < x.cols(); ++w) {
        if (x(i, w) == 0.0) continue;
        const bool listed = (use_gz && obj.hcm.gz_weights(w) != 0.0) ||
                            (use_sir && obj.hcm.sir_weights(w) != 0.0);
        if (listed) occl.push_back({i, w, n + static_cast<Eigen::Index>(occl.size())});
      }
    }
    xa.conservativeResize(n + static_cast<Eigen::Index>(occl.size()), Eigen::NoChange);
    for (const auto& o : occl) {
      xa.row(o.row) = x.row(o.sample);
      xa(o.row, o.word) = 0.0;
    }
  }

  const ForwardCache cache = g.Forward(xa);
  ObjectiveResult res;
  Matrix d_primary = Matrix::Zero(xa.rows(), spec.primary.n_classes);
  Matrix d_adv;
  if (use_ce) {
    CeBatch ce = WeightedCeBatch(cache.primary_probs.topRows(n), labels, obj.class_weights);
    res.losses.primary_ce = ce.loss;
    d_primary.topRows(n) += ce.d_logits;
  }
  if (use_adv) {
    if (static_cast<Eigen::Index>(adversary_labels.size()) != n) {
      throw ConfigError("adversary loss needs one adversary label per sample");
    }
    CeBatch ce = WeightedCeBatch(cache.adversary_probs.topRows(n), adversary_labels,
                                 obj.adversary_class_weights);
    res.losses.adversary_ce = ce.loss;
    d_adv = Matrix::Zero(xa.rows(), spec.adversary->n_classes);
    d_adv.topRows(n) = ce.d_logits;
  }
  if (use_gz || use_sir) {
    std::vector<int> n_gz(n, 0), n_sir(n, 0);
    for (const auto& o : occl) {
      if (use_gz && obj.hcm.gz_weights(o.word) != 0.0) ++n_gz[o.sample];
      if (use_sir && obj.hcm.sir_weights(o.word) != 0.0) ++n_sir[o.sample];
    }
    std::vector<double> gz(n, 0.0), sir(n, 0.0);
    const Matrix& logits = cache.primary_logits();
    const double inv_n = 1.0 / static_cast<double>(n);
    for (const auto& o : occl) {
      const int c = predicted[o.sample];
      const double s = std::tanh(logits(o.sample, c) - logits(o.row, c));
      const double sign = (s > 0.0) - (s < 0.0);
      double d_s = 0.0;
      if (use_gz && obj.hcm.gz_weights(o.word) != 0.0) {
        const double w = std::fabs(obj.hcm.gz_weights(o.word)) / n_gz[o.sample];
        gz[o.sample] += w * std::fabs(s);
        d_s -= obj.hcm.alpha * inv_n * w * sign;
      }
      if (use_sir && obj.hcm.sir_weights(o.word) != 0.0) {
        const double w = std::fabs(obj.hcm.sir_weights(o.word)) / n_sir[o.sample];
        sir[o.sample] += w * (1.0 - std::fabs(s));
        d_s += obj.hcm.beta * inv_n * w * sign;
      }
      const double d_diff = d_s * (1.0 - s * s);
      d_primary(o.sample, c) += d_diff;
      d_primary(o.row, c) -= d_diff;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (use_sir && n_sir[i] == 0) sir[i] = 1.0;
    }
    res.losses.hcm_gz = std::accumulate(gz.begin(), gz.end(), 0.0) * inv_n;
    res.losses.hcm_sir = std::accumulate(sir.begin(), sir.end(), 0.0) * inv_n;
  }
  res.losses.total = (use_ce ? res.losses.primary_ce : 0.0) -
                     (use_adv ? g.grl_lambda() * res.losses.adversary_ce : 0.0) -
                     (use_gz ? obj.hcm.alpha * res.losses.hcm_gz : 0.0) -
                     (use_sir ? obj.hcm.beta * res.losses.hcm_sir : 0.0);
  res.grads = g.Backward(cache, d_primary, use_adv ? &d_adv : nullptr).grads;
  return res;
}

void ValidateTrainConfig(const TrainConfig& cfg) {
  if (cfg.max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (cfg.patience < 1 || cfg.patience >= cfg.max_epochs) {
    throw ConfigError("train: patience must be in [1, max_epochs)");
  }
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(cfg.optimizer.lr > 0.0)) throw ConfigError("train: lr must be positive");
  if (!(cfg.optimizer.decay >= 0.0 && cfg.optimizer.decay < 1.0)) {
    throw ConfigError("train: decay must be in [0, 1)");
  }
  if (!(cfg.optimizer.eps > 0.0)) throw ConfigError("train: eps must be positive");
  for (const auto* ws : {&cfg.objective.class_weights, &cfg.objective.adversary_class_weights}) {
    for (double w : *ws) {
      if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("train: class weights must be > 0");
    }
  }
  if (cfg.objective.terms.empty()) throw ConfigError("train: no loss terms selected");
  if (!(cfg.chance_tolerance >= 0.0)) throw ConfigError("train: chance tolerance must be >= 0");
}

bool EarlyStopper::Update(double loss) {
  ++epoch_;
  if (epoch_ == 1 || loss < best_) {
    best_ = loss;
    best_epoch_ = epoch_;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return stale_ >= patience_;
}

double PrimaryUar(const ModelGraph& g, const Dataset& d) {
  const auto preds = g.PredictPrimary(d.x);
  return evalstats::Uar(preds, d.labels, g.spec().primary.n_classes).value;
}

double AdversaryUar(const ModelGraph& g, const Dataset& d) {
  if (!g.has_adversary()) throw ConfigError("graph has no adversary head");
  const auto preds = g.PredictAdversary(d.x);
  return evalstats::Uar(preds, d.adversary_labels, g.spec().adversary->n_classes).value;
}

TrainResult Train(const ModelGraph& init, const Dataset& train, const Dataset& val,
                  const TrainConfig& cfg) {
  ValidateTrainConfig(cfg);
  const auto& spec = init.spec();
  const bool use_adv = cfg.objective.terms.count(LossTerm::kAdversaryCeReversed) > 0;
  ValidateDataset(train, spec, use_adv);
  ValidateDataset(val, spec, use_adv);
  if (!cfg.objective.class_weights.empty() &&
      cfg.objective.class_weights.size() != static_cast<size_t>(spec.primary.n_classes)) {
    throw ConfigError("train: class weight count mismatch");
  }

  ModelGraph g = init;
  Rng rng(cfg.seed);
  Vector flat = Flatten(g.params());
  Vector state = Vector::Zero(flat.size());
  const Eigen::Index n = train.x.rows();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult res;
  EarlyStopper stopper(cfg.patience);
  Parameters best_any = g.params();
  std::optional<Parameters> best_eligible;
  double best_eligible_loss = 0.0;
  int best_eligible_epoch = 0;
  const double chance = use_adv ? 1.0 / spec.adversary->n_classes : 0.0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.Shuffle(&order);
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index end = std::min<Eigen::Index>(n, start + cfg.batch_size);
      Matrix xb(end - start, train.x.cols());
      std::vector<int> yb, ab;
      for (Eigen::Index k = start; k < end; ++k) {
        xb.row(k - start) = train.x.row(order[k]);
        yb.push_back(train.labels[order[k]]);
        if (use_adv) ab.push_back(train.adversary_labels[order[k]]);
      }
      ObjectiveResult obj = EvaluateObjective(g, xb, yb, ab, cfg.objective);
      loss_sum += obj.losses.total * static_cast<double>(end - start);
      RmspropStep(&flat, Flatten(obj.grads), &state, cfg.optimizer);
      Unflatten(flat, &g.params());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    const ForwardCache vc = g.Forward(val.x);
    rec.val_primary_loss =
        WeightedCeBatch(vc.primary_probs, val.labels, cfg.objective.class_weights).loss;
    const std::vector<int> vp = RowArgmax(vc.primary_logits());
    rec.val_primary_uar = evalstats::Uar(vp, val.labels, spec.primary.n_classes).value;
    if (use_adv) {
      const std::vector<int> va = RowArgmax(vc.adversary_logits());
      rec.val_adversary_uar =
          evalstats::Uar(va, val.adversary_labels, spec.adversary->n_classes).value;
      rec.eligible = std::fabs(*rec.val_adversary_uar - chance) <= cfg.chance_tolerance;
    }
    res.history.push_back(rec);

    const bool stop = stopper.Update(rec.val_primary_loss);
    if (stopper.best_epoch() == epoch) best_any = g.params();
    if (rec.eligible && (!best_eligible || rec.val_primary_loss < best_eligible_loss)) {
      best_eligible = g.params();
      best_eligible_loss = rec.val_primary_loss;
      best_eligible_epoch = epoch;
    }
    if (stop) break;
  }

  res.graph = g;
  if (best_eligible) {
    res.graph.params() = *best_eligible;
    res.best_epoch = best_eligible_epoch;
  } else {
    res.graph.params() = best_any;
    res.best_epoch = stopper.best_epoch();
    res.adversary_rule_unmet = true;
  }
  return res;
}

Vector LogitInputGradient(const ModelGraph& g, const Vector& x, int cls) {
  if (cls < 0 || cls >= g.spec().primary.n_classes) throw DomainError("class out of range");
  Matrix xm = x.transpose();
  const ForwardCache c = g.Forward(xm);
  Matrix d = Matrix::Zero(1, g.spec().primary.n_classes);
  d(0, cls) = 1.0;
  return g.Backward(c, d, nullptr).d_input.row(0).transpose();
}

Vector IntegratedGradients(const ModelGraph& g, const Vector& x, const Vector& baseline,
                           int steps, std::optional<int> cls) {
  if (x.size() != baseline.size() || x.size() != g.spec().input_dim) {
    throw DomainError("integrated gradients: shape mismatch");
  }
  if (steps < 1) throw DomainError("integrated gradients: steps must be >= 1");
  const Vector delta = x - baseline;
  if (delta.isZero(0.0)) return Vector::Zero(x.size());
  const int c = cls ? *cls : g.PredictPrimary(Matrix(x.transpose()))[0];
  if (c < 0 || c >= g.spec().primary.n_classes) throw DomainError("class out of range");
  Matrix path(steps, x.size());
  for (int k = 0; k < steps; ++k) {
    const double alpha = (k + 0.5) / steps;
    path.row(k) = (baseline + alpha * delta).transpose();
  }
  const ForwardCache cache = g.Forward(path);
  Matrix d = Matrix::Zero(steps, g.spec().primary.n_classes);
  d.col(c).setOnes();
  const Matrix grads = g.Backward(cache, d, nullptr).d_input;
  const Vector mean_grad = grads.colwise().sum().transpose() / static_cast<double>(steps);
  return delta.cwiseProduct(mean_grad);
}

hcm::SaliencyRecord SaliencyPerWord(const std::string& sample_id, const Vector& attributions,
                                    const Vector& x, const std::vector<std::string>& vocab,
                                    bool normalize) {
  if (attributions.size() != x.size() ||
      static_cast<size_t>(x.size()) != vocab.size()) {
    throw DomainError("saliency: attribution, input and vocabulary sizes differ");
  }
  hcm::SaliencyRecord rec;
  rec.sample_id = sample_id;
  double peak = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) == 0.0) continue;
    rec.tokens.push_back({vocab[i], attributions(i)});
    peak = std::max(peak, std::fabs(attributions(i)));
  }
  if (normalize && peak > 0.0) {
    for (auto& t : rec.tokens) t.saliency /= peak;
  }
  return rec;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'E', 'M', 'C', 'K'};
constexpr uint32_t kVersion = 1;

template <typename T>
void Put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Get(std::istream& is, const std::string& path) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw IoError("truncated checkpoint: " + path);
  }
  return v;
}

void PutString(std::ostream& os, const std::string& s) {
  Put<uint32_t>(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string GetString(std::istream& is, const std::string& path) {
  const uint32_t len = Get<uint32_t>(is, path);
  std::string s(len, '\0');
  if (len > 0 && !is.read(s.data(), len)) throw IoError("truncated checkpoint: " + path);
  return s;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const ModelGraph& g,
                    const std::string& config_hash) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint: " + path);
  os.write(kMagic, 4);
  Put<uint32_t>(os, kVersion);
  PutString(os, config_hash);
  PutString(os, SpecToJson(g.spec()).dump());
  const Vector flat = Flatten(g.params());
  Put<uint64_t>(os, static_cast<uint64_t>(flat.size()));
  os.write(reinterpret_cast<const char*>(flat.data()),
           static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!os) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not a checkpoint: " + path);
  }
  const uint32_t version = Get<uint32_t>(is, path);
  if (version != kVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
  }
  Checkpoint ck;
  ck.config_hash = GetString(is, path);
  GraphSpec spec;
  try {
    spec = SpecFromJson(nlohmann::json::parse(GetString(is, path)));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt checkpoint spec in " + path + ": " + e.what());
  }
  ck.graph = ModelGraph(spec, 0);
  const uint64_t count = Get<uint64_t>(is, path);
  Vector flat(static_cast<Eigen::Index>(count));
  if (count > 0 && !is.read(reinterpret_cast<char*>(flat.data()),
                            static_cast<std::streamsize>(count * sizeof(double)))) {
    throw IoError("truncated checkpoint: " + path);
  }
  if (count != static_cast<uint64_t>(Flatten(ck.graph.params()).size())) {
    throw IoError("checkpoint weight count does not match its architecture: " + path);
  }
  Unflatten(flat, &ck.graph.params());
  return ck;
}

nlohmann::ordered_json EpochToJson(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["train_loss"] = r.train_loss;
  j["val_primary_loss"] = r.val_primary_loss;
  j["val_primary_uar"] = r.val_primary_uar;
  j["val_adversary_uar"] =
      r.val_adversary_uar ? nlohmann::ordered_json(*r.val_adversary_uar) : nullptr;
  j["eligible"] = r.eligible;
  return j;
}

void WriteHistory(const std::string& path, const std::vector<EpochRecord>& history) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write history: " + path);
  for (const auto& r : history) os << EpochToJson(r).dump() << '\n';
}

}  // namespace nn
}  // namespace emoeval
