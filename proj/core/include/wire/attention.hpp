#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "wire/rope.hpp"
#include "wire/spectral.hpp"

namespace wire {

/// Post-projection queries, keys and values, one row per node.
struct AttentionBatch {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd K;
  Eigen::MatrixXd V;

  int n() const { return static_cast<int>(Q.rows()); }
  int d() const { return static_cast<int>(Q.cols()); }
};

enum class FeatureMap { kReLU, kIdentity };
enum class PerformerMode { kRotateQK, kRotateFeatures };

/// Peak auxiliary allocation of the streaming pass, in bytes. Excludes the
/// N x d output; must stay O(d^2) regardless of N.
struct AttentionStats {
  std::size_t aux_bytes = 0;
};

/// Thrown when a streaming denominator degenerates (zero for a plain
/// feature map, nonpositive under rotated features).
class DegenerateDenominator : public std::runtime_error {
 public:
  DegenerateDenominator(int row, const std::string& what)
      : std::runtime_error(what), row(row) {}
  int row;
};

/// Full softmax attention, row-max stabilized. Rotations, if any, are
/// already applied to Q and K by the caller.
Eigen::MatrixXd softmax_attention(const AttentionBatch& batch);

/// O(N) streaming linear attention with feature map phi:
/// row i = phi(q_i)^T S / (phi(q_i)^T s), never materializing N x N.
Eigen::MatrixXd linear_attention(const AttentionBatch& batch, FeatureMap fmap,
                                 AttentionStats* stats = nullptr);

/// Linear attention with rotary encodings, either rotating queries/keys
/// before the feature map (kRotateQK) or rotating the feature vectors
/// themselves (kRotateFeatures).
Eigen::MatrixXd wire_performer(const AttentionBatch& batch, FeatureMap fmap,
                               const WireFrequencies& freqs,
                               const SpectralCoords& coords, PerformerMode mode,
                               AttentionStats* stats = nullptr);

/// Softmax attention with per-node rotary encodings applied to Q and K.
Eigen::MatrixXd wire_softmax(const AttentionBatch& batch,
                             const WireFrequencies& freqs,
                             const SpectralCoords& coords);

/// Explicit post-softmax score matrix for small-N inspection. Pass freqs
/// and coords to rotate Q and K first.
Eigen::MatrixXd attention_scores_dump(const AttentionBatch& batch,
                                      const WireFrequencies* freqs = nullptr,
                                      const SpectralCoords* coords = nullptr);

}  // namespace wire
