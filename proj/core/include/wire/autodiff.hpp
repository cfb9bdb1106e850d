#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

namespace wire {

/// Thrown when an op produces a NaN or Inf (finite checks enabled) or when
/// training diverges.
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Minimal reverse-mode autodiff tape over dense row-major-shaped matrices.
///
/// Node ids are indices into the tape, in topological order by construction.
/// Each op records a backward closure; backward() seeds the loss gradient
/// and accumulates exact gradients into every node, leaves included. One
/// tape per forward pass; parameters live outside and are copied in as
/// leaves.
class Tape {
 public:
  using Mat = Eigen::MatrixXd;

  /// When true (default), every op validates that its output is finite.
  bool finite_checks = true;

  int leaf(Mat value);

  int matmul(int a, int b, bool trans_a = false, bool trans_b = false);
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  int scale(int a, double c);
  int add_scalar(int a, double c);
  /// Broadcasts a 1 x d row over the rows of a.
  int add_rowvec(int a, int bias);
  int mul_rowvec(int a, int gain);
  int relu(int a);
  /// Row-wise (x - mean) / sqrt(var + eps), pre-affine. A constant row maps
  /// to zeros.
  int layernorm_rows(int a, double eps = 1e-5);
  int softmax_rows(int a);
  int mean_pool_rows(int a);
  int sum_rows(int a);
  /// out(i, :) = num(i, :) / den(i); den is n x 1.
  int div_by_col(int num, int den);
  /// Rotates consecutive entry pairs of each row of z by the row's angles
  /// (theta is n x d/2). Gradients flow to both z and theta.
  int rope_rows(int z, int theta);
  /// Inverted dropout with a caller-supplied 0/1 mask.
  int dropout(int a, const Mat& mask, double keep_prob);
  /// Scalar mean squared error against a constant target.
  int mse(int pred, const Mat& target);

  const Mat& value(int id) const { return nodes_[id].value; }
  const Mat& grad(int id) const { return nodes_[id].grad; }

  /// Reverse sweep from a scalar node; seed scales the whole gradient
  /// (batch averaging). May be called once per tape.
  void backward(int loss, double seed = 1.0);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Tape&, int)> backprop;  // empty for leaves
  };
  std::vector<Node> nodes_;

  int push(Mat value, std::function<void(Tape&, int)> backprop,
           const char* op_name);
  void check_id(int id) const;
};

}  // namespace wire
