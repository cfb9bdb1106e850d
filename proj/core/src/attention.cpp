#include "wire/attention.hpp"

#include <cmath>

namespace wire {

namespace {

constexpr double kReluDenGuard = 1e-6;

void check_batch(const AttentionBatch& batch) {
  if (batch.n() == 0) throw std::invalid_argument("empty attention batch");
  if (batch.K.rows() != batch.n() || batch.V.rows() != batch.n() ||
      batch.K.cols() != batch.d() || batch.V.cols() != batch.d())
    throw std::invalid_argument("Q, K, V shapes are inconsistent");
}

Eigen::VectorXd apply_fmap(FeatureMap fmap, const Eigen::VectorXd& z) {
  if (fmap == FeatureMap::kReLU) return z.cwiseMax(0.0);
  return z;
}

Eigen::MatrixXd rotate_rows(const Eigen::MatrixXd& z,
                            const WireFrequencies& freqs,
                            const SpectralCoords& coords) {
  if (coords.n() != static_cast<int>(z.rows()))
    throw std::invalid_argument("coordinate row count does not match batch");
  if (freqs.d() != static_cast<int>(z.cols()))
    throw std::invalid_argument("frequency width does not match batch");
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (int i = 0; i < z.rows(); ++i) {
    const RotationAngles theta = angles(freqs, coords.row(i));
    out.row(i) = apply_rope_fast(z.row(i).transpose(), theta).transpose();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd softmax_attention(const AttentionBatch& batch) {
  check_batch(batch);
  const int n = batch.n();
  Eigen::MatrixXd out(n, batch.d());
  Eigen::VectorXd logits(n);
  for (int i = 0; i < n; ++i) {
    logits.noalias() = batch.K * batch.Q.row(i).transpose();
    const double row_max = logits.maxCoeff();
    logits = (logits.array() - row_max).exp();
    out.row(i) = (logits.transpose() * batch.V) / logits.sum();
  }
  return out;
}

Eigen::MatrixXd linear_attention(const AttentionBatch& batch, FeatureMap fmap,
                                 AttentionStats* stats) {
  check_batch(batch);
  const int n = batch.n();
  const int d = batch.d();

  // Streaming sums: S = sum_j phi(k_j) v_j^T, s = sum_j phi(k_j).
  Eigen::MatrixXd big_s = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd small_s = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd phi(d);
  for (int j = 0; j < n; ++j) {
    phi = apply_fmap(fmap, batch.K.row(j).transpose());
    big_s.noalias() += phi * batch.V.row(j);
    small_s += phi;
  }

  Eigen::MatrixXd out(n, d);
  for (int i = 0; i < n; ++i) {
    phi = apply_fmap(fmap, batch.Q.row(i).transpose());
    double den = phi.dot(small_s);
    if (den == 0.0)
      throw DegenerateDenominator(
          i, "all-zero attention denominator at row " + std::to_string(i));
    if (fmap == FeatureMap::kReLU) den += kReluDenGuard;
    out.row(i) = (phi.transpose() * big_s) / den;
  }
  if (stats) stats->aux_bytes = sizeof(double) * (static_cast<std::size_t>(d) * d + 2 * d);
  return out;
}

Eigen::MatrixXd wire_performer(const AttentionBatch& batch, FeatureMap fmap,
                               const WireFrequencies& freqs,
                               const SpectralCoords& coords, PerformerMode mode,
                               AttentionStats* stats) {
  check_batch(batch);
  const int n = batch.n();
  const int d = batch.d();
  if (d % 2 != 0) throw std::invalid_argument("embedding width must be even");
  if (coords.n() != n)
    throw std::invalid_argument("coordinate row count does not match batch");

  if (mode == PerformerMode::kRotateQK) {
    AttentionBatch rotated{rotate_rows(batch.Q, freqs, coords),
                           rotate_rows(batch.K, freqs, coords), batch.V};
    auto out = linear_attention(rotated, fmap, stats);
    if (stats) stats->aux_bytes += sizeof(double) * 2 * static_cast<std::size_t>(n) * d;
    return out;
  }

  // kRotateFeatures: phi first, then rotate the feature vector.
  Eigen::MatrixXd big_s = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd small_s = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd phi(d);
  for (int j = 0; j < n; ++j) {
    const RotationAngles theta = angles(freqs, coords.row(j));
    phi = apply_rope_fast(apply_fmap(fmap, batch.K.row(j).transpose()), theta);
    big_s.noalias() += phi * batch.V.row(j);
    small_s += phi;
  }
  Eigen::MatrixXd out(n, d);
  for (int i = 0; i < n; ++i) {
    const RotationAngles theta = angles(freqs, coords.row(i));
    phi = apply_rope_fast(apply_fmap(fmap, batch.Q.row(i).transpose()), theta);
    const double den = phi.dot(small_s);
    if (den <= 0.0)
      throw DegenerateDenominator(
          i, "nonpositive rotated-feature denominator at row " + std::to_string(i));
    out.row(i) = (phi.transpose() * big_s) / den;
  }
  if (stats) stats->aux_bytes = sizeof(double) * (static_cast<std::size_t>(d) * d + 2 * d);
  return out;
}

Eigen::MatrixXd wire_softmax(const AttentionBatch& batch,
                             const WireFrequencies& freqs,
                             const SpectralCoords& coords) {
  check_batch(batch);
  AttentionBatch rotated{rotate_rows(batch.Q, freqs, coords),
                         rotate_rows(batch.K, freqs, coords), batch.V};
  return softmax_attention(rotated);
}

Eigen::MatrixXd attention_scores_dump(const AttentionBatch& batch,
                                      const WireFrequencies* freqs,
                                      const SpectralCoords* coords) {
  check_batch(batch);
  Eigen::MatrixXd q = batch.Q;
  Eigen::MatrixXd k = batch.K;
  if (freqs && coords) {
    q = rotate_rows(q, *freqs, *coords);
    k = rotate_rows(k, *freqs, *coords);
  }
  Eigen::MatrixXd logits = q * k.transpose();
  for (int i = 0; i < logits.rows(); ++i) {
    const double row_max = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - row_max).exp();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

}  // namespace wire
