#include "wire/rope.hpp"

#include <cmath>
#include <stdexcept>

namespace wire {

RotationAngles angles(const WireFrequencies& freqs, const Eigen::VectorXd& r) {
  if (r.size() != freqs.omega.cols())
    throw std::invalid_argument("coordinate dimension does not match frequencies");
  return freqs.omega * r;
}

Eigen::VectorXd apply_rope_block(const Eigen::VectorXd& z,
                                 const RotationAngles& theta) {
  const int d = static_cast<int>(z.size());
  if (d % 2 != 0) throw std::invalid_argument("embedding width must be even");
  if (theta.size() * 2 != d)
    throw std::invalid_argument("angle count must be d/2");
  Eigen::VectorXd out(d);
  for (int n = 0; n < d / 2; ++n) {
    const double c = std::cos(theta[n]);
    const double s = std::sin(theta[n]);
    const double a = z[2 * n];
    const double b = z[2 * n + 1];
    out[2 * n] = c * a - s * b;
    out[2 * n + 1] = s * a + c * b;
  }
  return out;
}

Eigen::VectorXd apply_rope_fast(const Eigen::VectorXd& z,
                                const RotationAngles& theta) {
  const int d = static_cast<int>(z.size());
  if (d % 2 != 0) throw std::invalid_argument("embedding width must be even");
  if (theta.size() * 2 != d)
    throw std::invalid_argument("angle count must be d/2");
  Eigen::VectorXd out(d);
  // cos .* z plus signed sin .* Pz, with P swapping each entry pair.
  for (int n = 0; n < d / 2; ++n) {
    const double c = std::cos(theta[n]);
    const double s = std::sin(theta[n]);
    out[2 * n] = c * z[2 * n] + (-s) * z[2 * n + 1];
    out[2 * n + 1] = c * z[2 * n + 1] + s * z[2 * n];
  }
  return out;
}

RelativeAngleCheck relative_angle_property(const WireFrequencies& freqs,
                                           const Eigen::VectorXd& r_i,
                                           const Eigen::VectorXd& r_j,
                                           const Eigen::VectorXd& q,
                                           const Eigen::VectorXd& k) {
  const auto qi = apply_rope_block(q, angles(freqs, r_i));
  const auto kj = apply_rope_block(k, angles(freqs, r_j));
  const double lhs = qi.dot(kj);
  const Eigen::VectorXd delta = r_j - r_i;
  const double rhs = q.dot(apply_rope_block(k, angles(freqs, delta)));
  return {lhs, rhs};
}

WireFrequencies init_frequencies(int d, int m, const FreqInit& scheme, Rng& rng) {
  if (d <= 0 || d % 2 != 0) throw std::invalid_argument("d must be positive and even");
  if (m <= 0) throw std::invalid_argument("m must be positive");
  WireFrequencies freqs;
  freqs.omega = Eigen::MatrixXd::Zero(d / 2, m);
  if (const auto* g = std::get_if<GaussianScale>(&scheme)) {
    if (!(g->omega > 0.0))
      throw std::invalid_argument("gaussian frequency scale must be positive");
    for (int r = 0; r < d / 2; ++r)
      for (int c = 0; c < m; ++c) freqs.omega(r, c) = g->omega * rng.gaussian();
  } else if (const auto* e = std::get_if<ExponentialDecay>(&scheme)) {
    if (!(e->base > 0.0)) throw std::invalid_argument("decay base must be positive");
    if (e->axis < 0 || e->axis >= m)
      throw std::invalid_argument("decay axis out of range");
    for (int r = 0; r < d / 2; ++r)
      freqs.omega(r, e->axis) = std::pow(e->base, -2.0 * r / d);
  }
  return freqs;
}

Theorem2Stats theorem2_mc_check(const Graph& g, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& k, int i, int j,
                                double omega, int n_samples, Rng& rng) {
  const int d = static_cast<int>(q.size());
  if (k.size() != d || d % 2 != 0)
    throw std::invalid_argument("q and k must share an even dimension");

  const Eigen::MatrixXd lap = laplacian(g);
  const auto spec = eig_dense(lap, g.n_nodes());
  const auto coords = spectral_features(spec, FeatureVariant::kResistanceScaled,
                                        true, default_zero_tol(spec));
  if (coords.m() != g.n_nodes() - 1)
    throw std::invalid_argument("graph must be connected");

  const double resistance = effective_resistance(lap, i, j);
  const double qk = q.dot(k);
  const double predicted = qk * (1.0 - omega * omega * resistance / 2.0);
  if (n_samples <= 1) throw std::invalid_argument("need at least two samples");

  const Eigen::VectorXd r_i = coords.row(i);
  const Eigen::VectorXd r_j = coords.row(j);
  const int m = coords.m();

  double sum = 0.0, sum_sq = 0.0;
  Eigen::MatrixXd omega_draw(d / 2, m);
  for (int s = 0; s < n_samples; ++s) {
    for (int r = 0; r < d / 2; ++r)
      for (int c = 0; c < m; ++c) omega_draw(r, c) = omega * rng.gaussian();
    const WireFrequencies freqs{omega_draw};
    const auto qi = apply_rope_fast(q, angles(freqs, r_i));
    const auto kj = apply_rope_fast(k, angles(freqs, r_j));
    const double v = qi.dot(kj);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n_samples;
  const double var =
      std::max(0.0, (sum_sq - n_samples * mean * mean) / (n_samples - 1));
  const double stderr_mc = std::sqrt(var / n_samples);
  return {mean, predicted, stderr_mc, resistance};
}

}  // namespace wire
