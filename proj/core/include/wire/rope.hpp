#pragma once

#include <Eigen/Dense>
#include <variant>

#include "wire/graph.hpp"
#include "wire/rng.hpp"
#include "wire/spectral.hpp"

namespace wire {

/// One rotation angle per 2-element block; length d/2.
using RotationAngles = Eigen::VectorXd;

/// Learnable frequency matrix: row n holds the m-dimensional frequency
/// vector that maps a node's spectral coordinate to the angle of block n.
struct WireFrequencies {
  Eigen::MatrixXd omega;  // (d/2) x m

  int d() const { return 2 * static_cast<int>(omega.rows()); }
  int m() const { return static_cast<int>(omega.cols()); }
};

/// Block angles for one token: theta[n] = omega_row_n . r
RotationAngles angles(const WireFrequencies& freqs, const Eigen::VectorXd& r);

/// Rotates consecutive entry pairs (0,1), (2,3), ... of z by the 2x2
/// rotation with the block's angle. Reference form.
Eigen::VectorXd apply_rope_block(const Eigen::VectorXd& z,
                                 const RotationAngles& theta);

/// O(d) Hadamard form: cos .* z + signed-sin .* (pair-swapped z).
/// Agrees with apply_rope_block to 1e-12 on all inputs.
Eigen::VectorXd apply_rope_fast(const Eigen::VectorXd& z,
                                const RotationAngles& theta);

/// Evaluates both sides of the relative-rotation identity:
/// lhs = (R(r_i) q) . (R(r_j) k), rhs = q . (R(r_j - r_i) k).
struct RelativeAngleCheck {
  double lhs;
  double rhs;
};
RelativeAngleCheck relative_angle_property(const WireFrequencies& freqs,
                                           const Eigen::VectorXd& r_i,
                                           const Eigen::VectorXd& r_j,
                                           const Eigen::VectorXd& q,
                                           const Eigen::VectorXd& k);

/// Frequency initialization schemes.
struct GaussianScale {
  double omega;  // each row ~ N(0, omega^2 I_m)
};
struct ExponentialDecay {
  double base = 10000.0;  // row n carries base^{-2(n-1)/d} on one axis
  int axis = 0;
};
struct ZeroInit {};
using FreqInit = std::variant<GaussianScale, ExponentialDecay, ZeroInit>;

WireFrequencies init_frequencies(int d, int m, const FreqInit& scheme, Rng& rng);

/// Monte-Carlo estimate of the expected rotated logit under random
/// Gaussian frequencies, against the second-order resistance prediction
/// q.k * (1 - omega^2 R(i,j) / 2). Requires a connected graph; features are
/// the full resistance-scaled spectrum.
struct Theorem2Stats {
  double mc_mean;
  double predicted;
  double mc_stderr;
  double resistance;
};
Theorem2Stats theorem2_mc_check(const Graph& g, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& k, int i, int j,
                                double omega, int n_samples, Rng& rng);

}  // namespace wire
