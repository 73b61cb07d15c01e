// include/emoeval/nn.h

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

#ifndef EMOEVAL_NN_H_
#define EMOEVAL_NN_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emoeval/hcm.h"
#include "json.hpp"

namespace emoeval {
namespace nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DenseLayer {
  Matrix w;  // out x in
  Vector b;
};

using LayerStack = std::vector<DenseLayer>;

struct HeadSpec {
  std::vector<int> hidden;  // ReLU layers before the linear output
  int n_classes = 2;
};

struct GraphSpec {
  int input_dim = 1;
  std::vector<int> trunk;  // ReLU layer widths; empty feeds the input to the heads
  HeadSpec primary;
  std::optional<HeadSpec> adversary;
  double grl_lambda = 0.0;  // scale of the reversed adversary gradient
};

void ValidateSpec(const GraphSpec& spec);
nlohmann::ordered_json SpecToJson(const GraphSpec& spec);
GraphSpec SpecFromJson(const nlohmann::json& j);

struct Parameters {
  LayerStack trunk;
  LayerStack primary;
  LayerStack adversary;
};

Vector Flatten(const Parameters& p);
// `p` supplies the shapes.
void Unflatten(const Vector& flat, Parameters* p);

struct StackCache {
  std::vector<Matrix> pre;   // pre-activation per layer, rows are samples
  std::vector<Matrix> post;  // post[0] is the stack input
};

struct ForwardCache {
  StackCache trunk;
  StackCache primary;
  StackCache adversary;
  Matrix primary_probs;
  Matrix adversary_probs;  // empty without an adversary head

  const Matrix& embedding() const { return trunk.post.back(); }
  const Matrix& primary_logits() const { return primary.post.back(); }
  const Matrix& adversary_logits() const { return adversary.post.back(); }
};

struct BackwardResult {
  Parameters grads;
  Matrix d_input;
};

Matrix Softmax(const Matrix& logits);

class ModelGraph {
 public:
  ModelGraph() = default;
  // Weights and biases drawn uniformly from +/- 1/sqrt(fan_in).
  ModelGraph(const GraphSpec& spec, uint64_t seed);

  const GraphSpec& spec() const { return spec_; }
  Parameters& params() { return params_; }
  const Parameters& params() const { return params_; }
  bool has_adversary() const { return spec_.adversary.has_value(); }
  double grl_lambda() const { return spec_.grl_lambda; }
  void set_grl_lambda(double lambda);
  int embedding_dim() const;

  // Rows of `x` are samples. The reversal layer does nothing on this pass.
  ForwardCache Forward(const Matrix& x) const;
  Matrix Embed(const Matrix& x) const;
  std::vector<int> PredictPrimary(const Matrix& x) const;
  std::vector<int> PredictAdversary(const Matrix& x) const;

  // Heads receive the gradient of their own logits. The trunk receives the
  // primary gradient minus grl_lambda times the adversary gradient.
  BackwardResult Backward(const ForwardCache& cache, const Matrix& d_primary_logits,
                          const Matrix* d_adversary_logits) const;

 private:
  GraphSpec spec_;
  Parameters params_;
};

// -w_label * log(max(p_label, 1e-12)).
double WeightedCe(const Vector& probs, int label, const std::vector<double>& class_weights);

struct CeBatch {
  double loss = 0.0;    // batch mean
  Matrix d_logits;      // gradient of the batch mean
};

CeBatch WeightedCeBatch(const Matrix& probs, const std::vector<int>& labels,
                        const std::vector<double>& class_weights);

struct RmspropConfig {
  double lr = 1e-3;
  double decay = 0.9;
  double eps = 1e-8;
};

// s <- decay*s + (1-decay)*g^2; theta <- theta - lr*g/sqrt(s+eps).
void RmspropStep(Vector* params, const Vector& grads, Vector* state, const RmspropConfig& cfg);

enum class LossTerm { kCrossEntropyPrimary, kAdversaryCeReversed, kHcmGz, kHcmSir };

std::string LossTermName(LossTerm t);
LossTerm ParseLossTerm(const std::string& s);

// Word-level loss terms for token-presence inputs. A word's saliency is
// tanh of the drop in the predicted-class logit when the word is removed.
struct HcmLossConfig {
  Vector gz_weights;   // per input dimension; 0 for words outside the list
  Vector sir_weights;  // same, for the sensitive list
  double alpha = 1.0;
  double beta = 1.0;
};

struct Dataset {
  Matrix x;
  std::vector<int> labels;
  std::vector<int> adversary_labels;  // may be empty without an adversary head
};

void ValidateDataset(const Dataset& d, const GraphSpec& spec, bool need_adversary);

struct Objective {
  std::set<LossTerm> terms = {LossTerm::kCrossEntropyPrimary};
  std::vector<double> class_weights;            // empty means all 1
  std::vector<double> adversary_class_weights;  // empty means all 1
  HcmLossConfig hcm;
};

struct LossBreakdown {
  double primary_ce = 0.0;
  double adversary_ce = 0.0;
  double hcm_gz = 0.0;
  double hcm_sir = 0.0;
  double total = 0.0;  // the value descended by the trunk
};

struct ObjectiveResult {
  LossBreakdown losses;
  Parameters grads;
};

// Loss terms and gradients on one batch.
ObjectiveResult EvaluateObjective(const ModelGraph& g, const Matrix& x,
                                  const std::vector<int>& labels,
                                  const std::vector<int>& adversary_labels,
                                  const Objective& obj);

struct TrainConfig {
  RmspropConfig optimizer;
  int max_epochs = 50;
  int patience = 5;
  int batch_size = 32;
  uint64_t seed = 0;
  Objective objective;
  double chance_tolerance = 0.05;
};

void ValidateTrainConfig(const TrainConfig& cfg);

// Counts consecutive epochs without a strictly lower loss.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}
  // Returns true when training should stop after this epoch.
  bool Update(double loss);
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }
  int epochs_seen() const { return epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int stale_ = 0;
  double best_ = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_primary_loss = 0.0;
  double val_primary_uar = 0.0;
  std::optional<double> val_adversary_uar;
  bool eligible = true;  // adversary near chance, or no adversary
};

struct TrainResult {
  ModelGraph graph;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  bool adversary_rule_unmet = false;
};

TrainResult Train(const ModelGraph& init, const Dataset& train, const Dataset& val,
                  const TrainConfig& cfg);

double PrimaryUar(const ModelGraph& g, const Dataset& d);
double AdversaryUar(const ModelGraph& g, const Dataset& d);

// Gradient of one primary logit with respect to the input.
Vector LogitInputGradient(const ModelGraph& g, const Vector& x, int cls);

// Midpoint Riemann sum along the straight path from baseline to x, on the
// predicted primary class unless `cls` is given.
Vector IntegratedGradients(const ModelGraph& g, const Vector& x, const Vector& baseline,
                           int steps = 512, std::optional<int> cls = std::nullopt);

// Token-presence input: one saliency per present vocabulary word. With
// `normalize` the largest magnitude becomes 1.
hcm::SaliencyRecord SaliencyPerWord(const std::string& sample_id, const Vector& attributions,
                                    const Vector& x, const std::vector<std::string>& vocab,
                                    bool normalize = true);

void SaveCheckpoint(const std::string& path, const ModelGraph& g,
                    const std::string& config_hash);
struct Checkpoint {
  ModelGraph graph;
  std::string config_hash;
};
Checkpoint LoadCheckpoint(const std::string& path);

nlohmann::ordered_json EpochToJson(const EpochRecord& r);
void WriteHistory(const std::string& path, const std::vector<EpochRecord>& history);

}  // namespace nn
}  // namespace emoeval

#endif  // EMOEVAL_NN_H_
