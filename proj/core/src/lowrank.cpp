#include "wire/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wire {

namespace {

void check_spec(const KernelGraphSpec& spec) {
  if (spec.n() == 0) throw std::invalid_argument("empty point set");
  if (!(spec.sigma > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  for (const auto& p : spec.points)
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]))
      throw std::invalid_argument("non-finite point coordinate");
}

}  // namespace

Eigen::MatrixXd kernel_adjacency(const KernelGraphSpec& spec) {
  check_spec(spec);
  const int n = spec.n();
  Eigen::MatrixXd a(n, n);
  const double inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double dx = spec.points[i][0] - spec.points[j][0];
      const double dy = spec.points[i][1] - spec.points[j][1];
      const double dz = spec.points[i][2] - spec.points[j][2];
      a(i, j) = a(j, i) = std::exp(-(dx * dx + dy * dy + dz * dz) * inv);
    }
  }
  return a;
}

FourierFeatures sample_fourier_features(const KernelGraphSpec& spec, int r, Rng& rng) {
  check_spec(spec);
  if (r <= 0) throw std::invalid_argument("feature count must be positive");
  const int n = spec.n();
  constexpr int dim = 3;

  FourierFeatures out;
  out.normalization = 1.0;
  // Spectral density of the Gaussian kernel is Gaussian with per-axis
  // deviation 1 / (2 pi sigma).
  const double freq_scale = 1.0 / (2.0 * M_PI * spec.sigma);
  out.frequencies.resize(r, dim);
  for (int s = 0; s < r; ++s)
    for (int c = 0; c < dim; ++c) out.frequencies(s, c) = freq_scale * rng.gaussian();

  out.features.resize(n, 2 * r);
  const double amp = std::sqrt(out.normalization / r);
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < r; ++s) {
      const double phase = 2.0 * M_PI *
                           (out.frequencies(s, 0) * spec.points[i][0] +
                            out.frequencies(s, 1) * spec.points[i][1] +
                            out.frequencies(s, 2) * spec.points[i][2]);
      out.features(i, 2 * s) = amp * std::cos(phase);
      out.features(i, 2 * s + 1) = amp * std::sin(phase);
    }
  }
  return out;
}

LaplacianFactors build_factors(const KernelGraphSpec& spec,
                               const FourierFeatures& feats, DegreeMode degrees) {
  check_spec(spec);
  const int n = spec.n();
  if (feats.features.rows() != n)
    throw std::invalid_argument("feature rows do not match point count");
  const int width = static_cast<int>(feats.features.cols());

  LaplacianFactors factors;
  factors.clamped_degrees = 0;
  Eigen::VectorXd degree(n);
  if (degrees == DegreeMode::kExact) {
    degree = kernel_adjacency(spec).rowwise().sum();
  } else {
    const Eigen::VectorXd feat_sum = feats.features.colwise().sum().transpose();
    degree = feats.features * feat_sum;
    for (int i = 0; i < n; ++i) {
      if (degree[i] < 0.0) {
        degree[i] = 0.0;
        ++factors.clamped_degrees;
      }
    }
  }

  factors.x = Eigen::MatrixXd::Zero(n, n + width);
  factors.y = Eigen::MatrixXd::Zero(n, n + width);
  for (int i = 0; i < n; ++i) {
    const double root = std::sqrt(degree[i]);
    factors.x(i, i) = root;
    factors.y(i, i) = root;
  }
  factors.x.rightCols(width) = feats.features;
  factors.y.rightCols(width) = -feats.features;
  return factors;
}

LaplacianFactors jlt_compress(const LaplacianFactors& factors, int p, Rng& rng) {
  if (p < 1) throw std::invalid_argument("compressed width must be positive");
  Eigen::MatrixXd g(factors.width(), p);
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < p; ++j) g(i, j) = rng.gaussian();
  return jlt_compress_with(factors, g / std::sqrt(static_cast<double>(p)));
}

LaplacianFactors jlt_compress_with(const LaplacianFactors& factors,
                                   const Eigen::MatrixXd& projection) {
  if (projection.rows() != factors.width())
    throw std::invalid_argument("projection rows do not match factor width");
  LaplacianFactors out;
  out.x = factors.x * projection;
  out.y = factors.y * projection;
  out.compressed = true;
  out.clamped_degrees = factors.clamped_degrees;
  return out;
}

LowrankEig lowrank_eig(const LaplacianFactors& compressed, int k) {
  const int p = compressed.width();
  if (k < 1 || k > p) throw std::invalid_argument("need 1 <= k <= width");

  const Eigen::MatrixXd small = compressed.y.transpose() * compressed.x;  // p x p
  Eigen::EigenSolver<Eigen::MatrixXd> solver(small);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("small eigenproblem failed to converge");

  LowrankEig out;
  const double small_norm = std::max(1.0, small.norm());
  for (int c = 0; c < p; ++c) {
    const std::complex<double> lambda = solver.eigenvalues()[c];
    const Eigen::VectorXcd w = solver.eigenvectors().col(c);
    // Verify the small-problem pair; a defective matrix shows up here.
    const double small_res = (small * w - lambda * w).norm() / small_norm;
    if (small_res > 1e-6) out.schur_fallback = true;

    Eigen::VectorXcd lifted = compressed.x * w;
    const double lift_norm = lifted.norm();
    if (lift_norm <= 1e-10 * w.norm()) continue;  // kernel of Y^T X, not of X Y^T
    lifted /= lift_norm;

    const Eigen::VectorXcd applied =
        compressed.x * (compressed.y.transpose() * lifted);
    const double residual =
        (applied - lambda * lifted).norm() / std::max(1.0, std::abs(lambda));
    out.pairs.push_back({lambda, std::move(lifted), residual});
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const LowrankEigPair& a, const LowrankEigPair& b) {
              if (a.value.real() != b.value.real())
                return a.value.real() < b.value.real();
              return a.value.imag() < b.value.imag();
            });
  if (static_cast<int>(out.pairs.size()) > k) out.pairs.resize(k);
  return out;
}

Spectrum to_spectrum(const LowrankEig& eig, int k) {
  k = std::min<int>(k, static_cast<int>(eig.pairs.size()));
  if (k == 0) throw std::invalid_argument("no liftable eigenpairs");
  const int n = static_cast<int>(eig.pairs[0].vector.size());
  Spectrum spec;
  spec.eigenvalues.resize(k);
  spec.eigenvectors.resize(n, k);
  for (int c = 0; c < k; ++c) {
    spec.eigenvalues[c] = eig.pairs[c].value.real();
    Eigen::VectorXd real_part = eig.pairs[c].vector.real();
    const double nrm = real_part.norm();
    if (nrm > 0.0) real_part /= nrm;
    spec.eigenvectors.col(c) = real_part;
  }
  canonicalize_signs(spec.eigenvectors);
  spec.sign_canonical = true;
  return spec;
}

}  // namespace wire
