#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "wire/autodiff.hpp"
#include "wire/rng.hpp"
#include "wire/rope.hpp"

namespace wire {

using Mat = Eigen::MatrixXd;

enum class AttentionKind { kSoftmax, kPerformerReLU };

struct ModelConfig {
  int n_layers = 4;
  int d_model = 32;
  int d_mlp = 32;
  double dropout_rate = 0.2;
  int wire_m = 0;  // 0 disables the rotary encoding
  AttentionKind attention_kind = AttentionKind::kSoftmax;
  bool share_wire_across_layers = false;
  int input_dim = 0;
};

/// Named parameters with Adam moment buffers.
struct ParamStore {
  struct Entry {
    std::string name;
    Mat value;
    Mat m;  // first moment
    Mat v;  // second moment
  };
  std::vector<Entry> entries;

  int add(std::string name, Mat init);
  int find(const std::string& name) const;  // -1 when absent
  long total_size() const;
};

struct OptState {
  double base_lr = 2e-4;
  double weight_decay = 1e-4;
  double alpha = 0.01;  // cosine floor fraction
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  long total_steps = 1;
};

/// base_lr * (alpha + (1 - alpha) * (1 + cos(pi step / total)) / 2),
/// clamped to the schedule endpoints.
double cosine_lr(long step, long total_steps, double base_lr, double alpha);

/// One Adam step with bias correction and decoupled weight decay; the
/// learning rate follows the cosine schedule held in opt.
void adam_step(ParamStore& params, const std::vector<Mat>& grads, OptState& opt);

/// One training example: per-node input features, per-node rotary
/// coordinates (n x wire_m, ignored when wire_m = 0), scalar label.
struct Example {
  Mat features;
  Mat coords;
  double label = 0.0;
};

/// 4-layer single-head transformer regressor: embed, then per layer
/// [attention + residual + layernorm, MLP + residual + layernorm], then
/// mean-pool and a dense head to a scalar. Rotary encodings are applied to
/// queries and keys at every layer when wire_m > 0.
class Model {
 public:
  Model(ModelConfig cfg, Rng& init_rng);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  long wire_param_count() const;

  /// Deterministic eval-mode prediction (no dropout).
  double predict(const Mat& features, const Mat& coords) const;

  /// Post-softmax score matrix (or the explicit normalized feature-map
  /// scores for the Performer kind) at one layer, eval mode. layer = -1
  /// selects the final layer. wire_enabled = false skips the rotary
  /// encoding while keeping the trained weights.
  Mat attention_scores(const Mat& features, const Mat& coords, int layer,
                       bool wire_enabled) const;

  /// Builds the training-mode tape for one example and accumulates
  /// d(loss)/d(param) * loss_weight into grads. Returns the squared error.
  double forward_backward(const Example& ex, double loss_weight,
                          std::vector<Mat>& grads, Rng& dropout_rng);

  std::vector<std::pair<std::string, Mat>> checkpoint() const;
  void load_checkpoint(const std::vector<std::pair<std::string, Mat>>& values);

 private:
  ModelConfig cfg_;
  ParamStore params_;

  struct LayerCapture {
    int scores = -1;  // softmax scores node (kSoftmax)
    int phi_q = -1;   // rotated feature nodes (kPerformerReLU)
    int phi_k = -1;
  };

  int forward(Tape& tape, const Mat& features, const Mat& coords, bool training,
              Rng* dropout_rng, std::vector<std::pair<int, int>>* leaf_of_param,
              std::vector<LayerCapture>* captures = nullptr,
              bool wire_enabled = true) const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double test_rmse = 0.0;
  double lr = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  double best_test_rmse = 0.0;
  int best_epoch = -1;
  std::vector<std::pair<std::string, Mat>> best_checkpoint;
};

struct TrainOptions {
  int epochs = 100;
  int batch_size = 16;
  double base_lr = 2e-4;
  double weight_decay = 1e-4;
  double alpha = 0.01;
};

/// Full training loop: seeded shuffling, dropout, Adam with cosine decay.
/// Records the graph-size-normalized test RMSE each epoch and snapshots the
/// best parameters. Aborts with NumericalError if the loss diverges.
TrainLog train(const ModelConfig& cfg, const std::vector<Example>& train_set,
               const std::vector<Example>& test_set, int graph_n,
               const TrainOptions& opts, const Rng& rng);

}  // namespace wire
