#include "wire/autodiff.hpp"

#include <cmath>
#include <string>

namespace wire {

void Tape::check_id(int id) const {
  if (id < 0 || id >= size()) throw std::invalid_argument("bad tape node id");
}

int Tape::push(Mat value, std::function<void(Tape&, int)> backprop,
               const char* op_name) {
  if (finite_checks && !value.allFinite())
    throw NumericalError(std::string("non-finite value produced by ") + op_name);
  nodes_.push_back({std::move(value), Mat(), std::move(backprop)});
  return size() - 1;
}

int Tape::leaf(Mat value) { return push(std::move(value), nullptr, "leaf"); }

int Tape::matmul(int a, int b, bool trans_a, bool trans_b) {
  check_id(a);
  check_id(b);
  const Mat& av = nodes_[a].value;
  const Mat& bv = nodes_[b].value;
  Mat out;
  if (!trans_a && !trans_b) out = av * bv;
  else if (trans_a && !trans_b) out = av.transpose() * bv;
  else if (!trans_a && trans_b) out = av * bv.transpose();
  else out = av.transpose() * bv.transpose();
  return push(std::move(out),
              [a, b, trans_a, trans_b](Tape& t, int self) {
                const Mat& g = t.nodes_[self].grad;
                const Mat& av = t.nodes_[a].value;
                const Mat& bv = t.nodes_[b].value;
                Mat& ga = t.nodes_[a].grad;
                Mat& gb = t.nodes_[b].grad;
                if (!trans_a && !trans_b) {
                  ga.noalias() += g * bv.transpose();
                  gb.noalias() += av.transpose() * g;
                } else if (trans_a && !trans_b) {
                  ga.noalias() += bv * g.transpose();
                  gb.noalias() += av * g;
                } else if (!trans_a && trans_b) {
                  ga.noalias() += g * bv;
                  gb.noalias() += g.transpose() * av;
                } else {
                  ga.noalias() += bv.transpose() * g.transpose();
                  gb.noalias() += g.transpose() * av.transpose();
                }
              },
              "matmul");
}

int Tape::add(int a, int b) {
  check_id(a);
  check_id(b);
  if (nodes_[a].value.rows() != nodes_[b].value.rows() ||
      nodes_[a].value.cols() != nodes_[b].value.cols())
    throw std::invalid_argument("add shape mismatch");
  return push(nodes_[a].value + nodes_[b].value,
              [a, b](Tape& t, int self) {
                t.nodes_[a].grad += t.nodes_[self].grad;
                t.nodes_[b].grad += t.nodes_[self].grad;
              },
              "add");
}

int Tape::sub(int a, int b) {
  check_id(a);
  check_id(b);
  return push(nodes_[a].value - nodes_[b].value,
              [a, b](Tape& t, int self) {
                t.nodes_[a].grad += t.nodes_[self].grad;
                t.nodes_[b].grad -= t.nodes_[self].grad;
              },
              "sub");
}

int Tape::mul(int a, int b) {
  check_id(a);
  check_id(b);
  return push(nodes_[a].value.cwiseProduct(nodes_[b].value),
              [a, b](Tape& t, int self) {
                const Mat& g = t.nodes_[self].grad;
                t.nodes_[a].grad += g.cwiseProduct(t.nodes_[b].value);
                t.nodes_[b].grad += g.cwiseProduct(t.nodes_[a].value);
              },
              "mul");
}

int Tape::scale(int a, double c) {
  check_id(a);
  return push(c * nodes_[a].value,
              [a, c](Tape& t, int self) { t.nodes_[a].grad += c * t.nodes_[self].grad; },
              "scale");
}

int Tape::add_scalar(int a, double c) {
  check_id(a);
  return push(nodes_[a].value.array() + c,
              [a](Tape& t, int self) { t.nodes_[a].grad += t.nodes_[self].grad; },
              "add_scalar");
}

int Tape::add_rowvec(int a, int bias) {
  check_id(a);
  check_id(bias);
  const Mat& bv = nodes_[bias].value;
  if (bv.rows() != 1 || bv.cols() != nodes_[a].value.cols())
    throw std::invalid_argument("bias must be a 1 x d row");
  return push(nodes_[a].value.rowwise() + bv.row(0),
              [a, bias](Tape& t, int self) {
                const Mat& g = t.nodes_[self].grad;
                t.nodes_[a].grad += g;
                t.nodes_[bias].grad.row(0) += g.colwise().sum();
              },
              "add_rowvec");
}

int Tape::mul_rowvec(int a, int gain) {
  check_id(a);
  check_id(gain);
  const Mat& gv = nodes_[gain].value;
  if (gv.rows() != 1 || gv.cols() != nodes_[a].value.cols())
    throw std::invalid_argument("gain must be a 1 x d row");
  return push(nodes_[a].value.array().rowwise() * gv.row(0).array(),
              [a, gain](Tape& t, int self) {
                const Mat& g = t.nodes_[self].grad;
                const Mat& av = t.nodes_[a].value;
                const Mat& gv = t.nodes_[gain].value;
                t.nodes_[a].grad += g.array().rowwise() * gv.row(0).array();
                t.nodes_[gain].grad.row(0) += g.cwiseProduct(av).colwise().sum();
              },
              "mul_rowvec");
}

int Tape::relu(int a) {
  check_id(a);
  return push(nodes_[a].value.cwiseMax(0.0),
              [a](Tape& t, int self) {
                // Subgradient 0 at exactly 0.
                const Mat& av = t.nodes_[a].value;
                t.nodes_[a].grad +=
                    t.nodes_[self].grad.cwiseProduct((av.array() > 0.0).cast<double>().matrix());
              },
              "relu");
}

int Tape::layernorm_rows(int a, double eps) {
  check_id(a);
  const Mat& av = nodes_[a].value;
  const int cols = static_cast<int>(av.cols());
  Mat out(av.rows(), cols);
  Eigen::VectorXd inv_std(av.rows());
  for (int i = 0; i < av.rows(); ++i) {
    const double mean = av.row(i).mean();
    const double var = (av.row(i).array() - mean).square().mean();
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    out.row(i) = (av.row(i).array() - mean) * inv_std[i];
  }
  return push(std::move(out),
              [a, inv_std, cols](Tape& t, int self) {
                const Mat& g = t.nodes_[self].grad;
                const Mat& y = t.nodes_[self].value;
                Mat& ga = t.nodes_[a].grad;
                for (int i = 0; i < g.rows(); ++i) {
                  const double mean_g = g.row(i).mean();
                  const double mean_gy = g.row(i).cwiseProduct(y.row(i)).mean();
                  ga.row(i) += inv_std[i] *
                               (g.row(i).array() - mean_g - y.row(i).array() * mean_gy)
                                   .matrix();
                }
                (void)cols;
              },
              "layernorm_rows");
}

int Tape::softmax_rows(int a) {
  check_id(a);
  const Mat& av = nodes_[a].value;
  Mat out(av.rows(), av.cols());
  for (int i = 0; i < av.rows(); ++i) {
    const double row_max = av.row(i).maxCoeff();
    out.row(i) = (av.row(i).array() - row_max).exp();
    out.row(i) /= out.row(i).sum();
  }
  return push(std::move(out),
              [a](Tape& t, int self) {
                const Mat& g = t.nodes_[self].grad;
                const Mat& p = t.nodes_[self].value;
                Mat& ga = t.nodes_[a].grad;
                for (int i = 0; i < g.rows(); ++i) {
                  const double dot = g.row(i).dot(p.row(i));
                  ga.row(i) += p.row(i).cwiseProduct(g.row(i).array() - dot);
                }
              },
              "softmax_rows");
}

int Tape::mean_pool_rows(int a) {
  check_id(a);
  const double n = static_cast<double>(nodes_[a].value.rows());
  return push(nodes_[a].value.colwise().mean(),
              [a, n](Tape& t, int self) {
                t.nodes_[a].grad.rowwise() += (t.nodes_[self].grad.row(0) / n);
              },
              "mean_pool_rows");
}

int Tape::sum_rows(int a) {
  check_id(a);
  return push(nodes_[a].value.colwise().sum(),
              [a](Tape& t, int self) {
                t.nodes_[a].grad.rowwise() += t.nodes_[self].grad.row(0);
              },
              "sum_rows");
}

int Tape::div_by_col(int num, int den) {
  check_id(num);
  check_id(den);
  const Mat& nv = nodes_[num].value;
  const Mat& dv = nodes_[den].value;
  if (dv.cols() != 1 || dv.rows() != nv.rows())
    throw std::invalid_argument("denominator must be n x 1");
  Mat out = nv.array().colwise() / dv.col(0).array();
  return push(std::move(out),
              [num, den](Tape& t, int self) {
                const Mat& g = t.nodes_[self].grad;
                const Mat& out = t.nodes_[self].value;
                const Mat& dv = t.nodes_[den].value;
                t.nodes_[num].grad += (g.array().colwise() / dv.col(0).array()).matrix();
                t.nodes_[den].grad.col(0) -=
                    (g.cwiseProduct(out).rowwise().sum().array() / dv.col(0).array())
                        .matrix();
              },
              "div_by_col");
}

int Tape::rope_rows(int z, int theta) {
  check_id(z);
  check_id(theta);
  const Mat& zv = nodes_[z].value;
  const Mat& tv = nodes_[theta].value;
  const int d = static_cast<int>(zv.cols());
  if (d % 2 != 0 || tv.cols() * 2 != d || tv.rows() != zv.rows())
    throw std::invalid_argument("rope_rows shape mismatch");
  Mat out(zv.rows(), d);
  for (int i = 0; i < zv.rows(); ++i) {
    for (int b = 0; b < d / 2; ++b) {
      const double c = std::cos(tv(i, b));
      const double s = std::sin(tv(i, b));
      out(i, 2 * b) = c * zv(i, 2 * b) - s * zv(i, 2 * b + 1);
      out(i, 2 * b + 1) = s * zv(i, 2 * b) + c * zv(i, 2 * b + 1);
    }
  }
  return push(std::move(out),
              [z, theta, d](Tape& t, int self) {
                const Mat& g = t.nodes_[self].grad;
                const Mat& zv = t.nodes_[z].value;
                const Mat& tv = t.nodes_[theta].value;
                Mat& gz = t.nodes_[z].grad;
                Mat& gt = t.nodes_[theta].grad;
                for (int i = 0; i < g.rows(); ++i) {
                  for (int b = 0; b < d / 2; ++b) {
                    const double c = std::cos(tv(i, b));
                    const double s = std::sin(tv(i, b));
                    const double g0 = g(i, 2 * b), g1 = g(i, 2 * b + 1);
                    const double a = zv(i, 2 * b), bb = zv(i, 2 * b + 1);
                    gz(i, 2 * b) += c * g0 + s * g1;
                    gz(i, 2 * b + 1) += -s * g0 + c * g1;
                    gt(i, b) += g0 * (-s * a - c * bb) + g1 * (c * a - s * bb);
                  }
                }
              },
              "rope_rows");
}

int Tape::dropout(int a, const Mat& mask, double keep_prob) {
  check_id(a);
  if (mask.rows() != nodes_[a].value.rows() || mask.cols() != nodes_[a].value.cols())
    throw std::invalid_argument("dropout mask shape mismatch");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0))
    throw std::invalid_argument("keep probability must be in (0, 1]");
  Mat scaled = mask / keep_prob;
  return push(nodes_[a].value.cwiseProduct(scaled),
              [a, scaled](Tape& t, int self) {
                t.nodes_[a].grad += t.nodes_[self].grad.cwiseProduct(scaled);
              },
              "dropout");
}

int Tape::mse(int pred, const Mat& target) {
  check_id(pred);
  const Mat& pv = nodes_[pred].value;
  if (pv.rows() != target.rows() || pv.cols() != target.cols())
    throw std::invalid_argument("mse target shape mismatch");
  const double count = static_cast<double>(pv.size());
  Mat diff = pv - target;
  Mat out(1, 1);
  out(0, 0) = diff.squaredNorm() / count;
  return push(std::move(out),
              [pred, diff, count](Tape& t, int self) {
                t.nodes_[pred].grad += (2.0 / count) * t.nodes_[self].grad(0, 0) * diff;
              },
              "mse");
}

void Tape::backward(int loss, double seed) {
  check_id(loss);
  if (nodes_[loss].value.size() != 1)
    throw std::invalid_argument("backward requires a scalar loss");
  for (auto& node : nodes_) {
    node.grad.resize(node.value.rows(), node.value.cols());
    node.grad.setZero();
  }
  nodes_[loss].grad(0, 0) = seed;
  for (int id = loss; id >= 0; --id)
    if (nodes_[id].backprop) nodes_[id].backprop(*this, id);
}

}  // namespace wire
