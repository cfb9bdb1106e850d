#include "wire/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wire {

int ParamStore::add(std::string name, Mat init) {
  entries.push_back({std::move(name), std::move(init), Mat(), Mat()});
  auto& e = entries.back();
  e.m = Mat::Zero(e.value.rows(), e.value.cols());
  e.v = Mat::Zero(e.value.rows(), e.value.cols());
  return static_cast<int>(entries.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].name == name) return static_cast<int>(i);
  return -1;
}

long ParamStore::total_size() const {
  long total = 0;
  for (const auto& e : entries) total += static_cast<long>(e.value.size());
  return total;
}

double cosine_lr(long step, long total_steps, double base_lr, double alpha) {
  if (total_steps < 1) throw std::invalid_argument("total_steps must be positive");
  step = std::clamp<long>(step, 0, total_steps);
  const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
  return base_lr * (alpha + (1.0 - alpha) * 0.5 * (1.0 + std::cos(M_PI * progress)));
}

void adam_step(ParamStore& params, const std::vector<Mat>& grads, OptState& opt) {
  if (grads.size() != params.entries.size())
    throw std::invalid_argument("gradient count does not match parameters");
  const double lr = cosine_lr(opt.step, opt.total_steps, opt.base_lr, opt.alpha);
  ++opt.step;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    auto& e = params.entries[i];
    const Mat& g = grads[i];
    if (g.rows() != e.value.rows() || g.cols() != e.value.cols())
      throw std::invalid_argument("gradient shape mismatch for " + e.name);
    e.m = opt.beta1 * e.m + (1.0 - opt.beta1) * g;
    e.v = opt.beta2 * e.v + (1.0 - opt.beta2) * g.cwiseProduct(g);
    const Mat m_hat = e.m / bc1;
    const Mat v_hat = e.v / bc2;
    e.value -= lr * (m_hat.array() / (v_hat.array().sqrt() + opt.eps)).matrix();
    if (opt.weight_decay != 0.0) e.value -= lr * opt.weight_decay * e.value;
  }
}

namespace {

Mat gaussian_init(int rows, int cols, double scale, Rng& rng) {
  Mat w(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = scale * rng.gaussian();
  return w;
}

Mat bernoulli_mask(int rows, int cols, double keep_prob, Rng& rng) {
  Mat mask(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) mask(i, j) = rng.uniform() < keep_prob ? 1.0 : 0.0;
  return mask;
}

constexpr double kPerformerDenGuard = 1e-6;

}  // namespace

Model::Model(ModelConfig cfg, Rng& init_rng) : cfg_(std::move(cfg)) {
  if (cfg_.input_dim <= 0) throw std::invalid_argument("input_dim must be set");
  if (cfg_.wire_m > 0 && cfg_.d_model % 2 != 0)
    throw std::invalid_argument("d_model must be even with rotary encodings");
  const int d = cfg_.d_model;
  Rng rng = init_rng.substream("init");

  auto dense = [&](const std::string& name, int in, int out) {
    params_.add(name + ".w", gaussian_init(in, out, 1.0 / std::sqrt(in), rng));
    params_.add(name + ".b", Mat::Zero(1, out));
  };

  dense("embed", cfg_.input_dim, d);
  const int n_wire = cfg_.wire_m > 0 ? (cfg_.share_wire_across_layers ? 1 : cfg_.n_layers) : 0;
  for (int w = 0; w < n_wire; ++w) {
    const std::string name =
        cfg_.share_wire_across_layers ? "wire.omega" : "layer" + std::to_string(w) + ".wire.omega";
    WireFrequencies freqs = init_frequencies(
        d, cfg_.wire_m, GaussianScale{1.0 / std::sqrt(cfg_.wire_m)}, rng);
    params_.add(name, freqs.omega);
  }
  for (int l = 0; l < cfg_.n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    const double proj_scale = 1.0 / std::sqrt(d);
    params_.add(p + "attn.wq", gaussian_init(d, d, proj_scale, rng));
    params_.add(p + "attn.wk", gaussian_init(d, d, proj_scale, rng));
    params_.add(p + "attn.wv", gaussian_init(d, d, proj_scale, rng));
    params_.add(p + "attn.wo", gaussian_init(d, d, proj_scale, rng));
    params_.add(p + "ln1.g", Mat::Ones(1, d));
    params_.add(p + "ln1.b", Mat::Zero(1, d));
    dense(p + "mlp.fc1", d, cfg_.d_mlp);
    dense(p + "mlp.fc2", cfg_.d_mlp, d);
    params_.add(p + "ln2.g", Mat::Ones(1, d));
    params_.add(p + "ln2.b", Mat::Zero(1, d));
  }
  dense("head", d, 1);
}

long Model::wire_param_count() const {
  long count = 0;
  for (const auto& e : params_.entries)
    if (e.name.find("wire.omega") != std::string::npos)
      count += static_cast<long>(e.value.size());
  return count;
}

int Model::forward(Tape& tape, const Mat& features, const Mat& coords,
                   bool training, Rng* dropout_rng,
                   std::vector<std::pair<int, int>>* leaf_of_param,
                   std::vector<LayerCapture>* captures, bool wire_enabled) const {
  if (features.cols() != cfg_.input_dim)
    throw std::invalid_argument("feature width does not match input_dim");
  if (cfg_.wire_m > 0 &&
      (coords.rows() != features.rows() || coords.cols() != cfg_.wire_m))
    throw std::invalid_argument("coordinate shape does not match wire_m");

  const int n = static_cast<int>(features.rows());
  const int d = cfg_.d_model;
  const double keep = 1.0 - cfg_.dropout_rate;
  const bool use_dropout = training && cfg_.dropout_rate > 0.0;

  std::vector<int> leaf(params_.entries.size());
  for (std::size_t i = 0; i < params_.entries.size(); ++i) {
    leaf[i] = tape.leaf(params_.entries[i].value);
    if (leaf_of_param) leaf_of_param->push_back({static_cast<int>(i), leaf[i]});
  }
  auto pid = [&](const std::string& name) {
    const int idx = params_.find(name);
    if (idx < 0) throw std::logic_error("missing parameter " + name);
    return leaf[idx];
  };

  const int x_in = tape.leaf(features);
  int h = tape.add_rowvec(tape.matmul(x_in, pid("embed.w")), pid("embed.b"));

  int coords_leaf = -1;
  if (cfg_.wire_m > 0) coords_leaf = tape.leaf(coords);

  auto maybe_dropout = [&](int x) {
    if (!use_dropout) return x;
    const auto& v = tape.value(x);
    return tape.dropout(
        x, bernoulli_mask(static_cast<int>(v.rows()), static_cast<int>(v.cols()),
                          keep, *dropout_rng),
        keep);
  };

  for (int l = 0; l < cfg_.n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    int q = tape.matmul(h, pid(p + "attn.wq"));
    int k = tape.matmul(h, pid(p + "attn.wk"));
    const int v = tape.matmul(h, pid(p + "attn.wv"));
    if (cfg_.wire_m > 0 && wire_enabled) {
      const std::string wname =
          cfg_.share_wire_across_layers ? "wire.omega" : p + "wire.omega";
      const int theta = tape.matmul(coords_leaf, pid(wname), false, true);
      q = tape.rope_rows(q, theta);
      k = tape.rope_rows(k, theta);
    }
    LayerCapture capture;
    int attn;
    if (cfg_.attention_kind == AttentionKind::kSoftmax) {
      const int scores = tape.softmax_rows(tape.matmul(q, k, false, true));
      capture.scores = scores;
      attn = tape.matmul(scores, v);
    } else {
      const int phi_q = tape.relu(q);
      const int phi_k = tape.relu(k);
      capture.phi_q = phi_q;
      capture.phi_k = phi_k;
      const int big_s = tape.matmul(phi_k, v, true, false);        // d x d
      const int small_s = tape.sum_rows(phi_k);                    // 1 x d
      const int num = tape.matmul(phi_q, big_s);                   // n x d
      const int den = tape.add_scalar(tape.matmul(phi_q, small_s, false, true),
                                      kPerformerDenGuard);         // n x 1
      attn = tape.div_by_col(num, den);
    }
    if (captures) captures->push_back(capture);
    attn = tape.matmul(attn, pid(p + "attn.wo"));
    h = tape.add(h, maybe_dropout(attn));
    h = tape.add_rowvec(
        tape.mul_rowvec(tape.layernorm_rows(h), pid(p + "ln1.g")), pid(p + "ln1.b"));

    int mlp = tape.relu(
        tape.add_rowvec(tape.matmul(h, pid(p + "mlp.fc1.w")), pid(p + "mlp.fc1.b")));
    mlp = tape.add_rowvec(tape.matmul(mlp, pid(p + "mlp.fc2.w")), pid(p + "mlp.fc2.b"));
    h = tape.add(h, maybe_dropout(mlp));
    h = tape.add_rowvec(
        tape.mul_rowvec(tape.layernorm_rows(h), pid(p + "ln2.g")), pid(p + "ln2.b"));
  }

  const int pooled = tape.mean_pool_rows(h);
  (void)n;
  return tape.add_rowvec(tape.matmul(pooled, pid("head.w")), pid("head.b"));
}

double Model::predict(const Mat& features, const Mat& coords) const {
  Tape tape;
  const int pred = forward(tape, features, coords, false, nullptr, nullptr);
  return tape.value(pred)(0, 0);
}

Mat Model::attention_scores(const Mat& features, const Mat& coords, int layer,
                            bool wire_enabled) const {
  if (layer < 0) layer = cfg_.n_layers - 1;
  if (layer >= cfg_.n_layers) throw std::invalid_argument("layer out of range");
  Tape tape;
  std::vector<LayerCapture> captures;
  forward(tape, features, coords, false, nullptr, nullptr, &captures, wire_enabled);
  const LayerCapture& cap = captures.at(layer);
  if (cfg_.attention_kind == AttentionKind::kSoftmax) return tape.value(cap.scores);
  const Mat& phi_q = tape.value(cap.phi_q);
  const Mat& phi_k = tape.value(cap.phi_k);
  Mat scores = phi_q * phi_k.transpose();
  for (int i = 0; i < scores.rows(); ++i)
    scores.row(i) /= scores.row(i).sum() + kPerformerDenGuard;
  return scores;
}

double Model::forward_backward(const Example& ex, double loss_weight,
                               std::vector<Mat>& grads, Rng& dropout_rng) {
  Tape tape;
  std::vector<std::pair<int, int>> leaf_of_param;
  const int pred = forward(tape, ex.features, ex.coords, true, &dropout_rng,
                           &leaf_of_param);
  Mat target(1, 1);
  target(0, 0) = ex.label;
  const int loss = tape.mse(pred, target);
  const double se = tape.value(loss)(0, 0);
  tape.backward(loss, loss_weight);
  for (const auto& [param_idx, leaf_id] : leaf_of_param)
    grads[param_idx] += tape.grad(leaf_id);
  return se;
}

std::vector<std::pair<std::string, Mat>> Model::checkpoint() const {
  std::vector<std::pair<std::string, Mat>> out;
  out.reserve(params_.entries.size());
  for (const auto& e : params_.entries) out.emplace_back(e.name, e.value);
  return out;
}

void Model::load_checkpoint(const std::vector<std::pair<std::string, Mat>>& values) {
  for (const auto& [name, value] : values) {
    const int idx = params_.find(name);
    if (idx < 0) throw std::invalid_argument("unknown parameter " + name);
    auto& e = params_.entries[idx];
    if (value.rows() != e.value.rows() || value.cols() != e.value.cols())
      throw std::invalid_argument("checkpoint shape mismatch for " + name);
    e.value = value;
  }
}

TrainLog train(const ModelConfig& cfg, const std::vector<Example>& train_set,
               const std::vector<Example>& test_set, int graph_n,
               const TrainOptions& opts, const Rng& rng) {
  if (train_set.empty() || test_set.empty())
    throw std::invalid_argument("datasets must be nonempty");

  Rng init_rng = rng;
  Model model(cfg, init_rng);
  Rng shuffle_rng = rng.substream("shuffle");
  Rng dropout_rng = rng.substream("dropout");

  const int n_train = static_cast<int>(train_set.size());
  const long steps_per_epoch = (n_train + opts.batch_size - 1) / opts.batch_size;
  OptState opt;
  opt.base_lr = opts.base_lr;
  opt.weight_decay = opts.weight_decay;
  opt.alpha = opts.alpha;
  opt.total_steps = steps_per_epoch * opts.epochs;

  std::vector<Mat> grads;
  for (const auto& e : model.params().entries)
    grads.push_back(Mat::Zero(e.value.rows(), e.value.cols()));

  std::vector<int> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  TrainLog log;
  log.best_test_rmse = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    // Seeded Fisher-Yates shuffle.
    for (int i = n_train - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.below(i + 1));
      std::swap(order[i], order[j]);
    }

    const double lr_now = cosine_lr(opt.step, opt.total_steps, opt.base_lr, opt.alpha);
    double loss_sum = 0.0;
    for (int start = 0; start < n_train; start += opts.batch_size) {
      const int batch = std::min(opts.batch_size, n_train - start);
      for (auto& g : grads) g.setZero();
      for (int b = 0; b < batch; ++b)
        loss_sum += model.forward_backward(train_set[order[start + b]], 1.0 / batch,
                                           grads, dropout_rng);
      adam_step(model.params(), grads, opt);
    }
    const double train_loss = loss_sum / n_train;
    if (!std::isfinite(train_loss))
      throw NumericalError("training loss diverged at epoch " + std::to_string(epoch));

    double sq_sum = 0.0;
    for (const auto& ex : test_set) {
      const double err = model.predict(ex.features, ex.coords) - ex.label;
      sq_sum += err * err;
    }
    const double test_rmse =
        std::sqrt(sq_sum / static_cast<double>(test_set.size())) / graph_n;

    log.epochs.push_back({epoch, train_loss, test_rmse, lr_now});
    if (test_rmse < log.best_test_rmse) {
      log.best_test_rmse = test_rmse;
      log.best_epoch = epoch;
      log.best_checkpoint = model.checkpoint();
    }
  }
  return log;
}

}  // namespace wire
