#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "wire/graph.hpp"
#include "wire/rng.hpp"
#include "wire/spectral.hpp"

namespace wire {

/// Implicit kernel graph over a point cloud: a_ij = exp(-|v_i - v_j|^2 / (2 sigma^2)).
/// The diagonal a_ii = 1 is included; it cancels in L = D - A.
struct KernelGraphSpec {
  std::vector<Point3> points;
  double sigma = 1.0;

  int n() const { return static_cast<int>(points.size()); }
};

/// Random Fourier features realifying the complex exponential pair: row i is
/// sqrt(C/r) [cos(2 pi w_s . v_i), sin(2 pi w_s . v_i)]_{s=1..r}, so that
/// E[row_i . row_j] = a_ij entrywise.
struct FourierFeatures {
  Eigen::MatrixXd frequencies;  // r x dim
  Eigen::MatrixXd features;     // N x 2r
  double normalization = 1.0;   // C; 1 for the Gaussian kernel

  int r() const { return static_cast<int>(frequencies.rows()); }
};

enum class DegreeMode { kExact, kEstimated };

/// Factor pair with X Y^T an unbiased estimate of L. Row i of X is the
/// degree one-hot sqrt(d_ii) e_i concatenated with the feature row; Y
/// negates the feature block.
struct LaplacianFactors {
  Eigen::MatrixXd x;  // N x (N + 2r), or N x p after compression
  Eigen::MatrixXd y;
  bool compressed = false;
  int clamped_degrees = 0;  // negative estimated degrees clamped to zero

  int n() const { return static_cast<int>(x.rows()); }
  int width() const { return static_cast<int>(x.cols()); }
  /// Applies the factored operator: X (Y^T v).
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return x * (y.transpose() * v); }
};

/// Exact kernel adjacency and Laplacian, for oracles and exact degrees.
Eigen::MatrixXd kernel_adjacency(const KernelGraphSpec& spec);

FourierFeatures sample_fourier_features(const KernelGraphSpec& spec, int r, Rng& rng);

LaplacianFactors build_factors(const KernelGraphSpec& spec,
                               const FourierFeatures& feats, DegreeMode degrees);

/// Johnson-Lindenstrauss compression with a shared iid N(0,1) matrix G:
/// Xc = X G / sqrt(p), Yc = Y G / sqrt(p).
LaplacianFactors jlt_compress(const LaplacianFactors& factors, int p, Rng& rng);

/// Same, with an explicit projection matrix (tests use the identity embedding).
LaplacianFactors jlt_compress_with(const LaplacianFactors& factors,
                                   const Eigen::MatrixXd& projection);

/// One approximate eigenpair of the factored operator X Y^T, lifted from the
/// small p x p problem Y^T X. Values may be complex since the estimate is
/// not symmetric.
struct LowrankEigPair {
  std::complex<double> value;
  Eigen::VectorXcd vector;  // normalized lift X w
  double residual;          // |Xc Yc^T v - lambda v| / max(1, |lambda|)
};

struct LowrankEig {
  std::vector<LowrankEigPair> pairs;  // sorted by real part ascending
  bool schur_fallback = false;        // eigenvector extraction was unreliable
};

/// Diagonalizes (Y^T X) in O(p^3), lifting eigenvectors as X w. Pairs whose
/// lift collapses (kernel of the small matrix not visible to the operator)
/// are discarded. k limits the returned count to the smallest real parts.
LowrankEig lowrank_eig(const LaplacianFactors& compressed, int k);

/// Real-part view of the smallest-k pairs as a Spectrum for downstream
/// feature construction. Columns are normalized, not orthogonalized.
Spectrum to_spectrum(const LowrankEig& eig, int k);

}  // namespace wire
