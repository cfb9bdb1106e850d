#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wire/rng.hpp"

namespace wire {

/// The lowest eigenpairs of a symmetric PSD operator, eigenvalues ascending,
/// eigenvectors as orthonormal columns of an N x m matrix.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  bool sign_canonical = false;

  int n() const { return static_cast<int>(eigenvectors.rows()); }
  int m() const { return static_cast<int>(eigenvalues.size()); }
};

enum class FeatureVariant { kRaw, kResistanceScaled };

/// Per-node spectral coordinates: row i of `coords` is the m-dimensional
/// rotary coordinate r_i. `eigenvalues` holds the eigenvalue of each
/// retained column.
struct SpectralCoords {
  Eigen::MatrixXd coords;
  Eigen::VectorXd eigenvalues;
  FeatureVariant variant = FeatureVariant::kRaw;
  bool skip_trivial = false;

  int n() const { return static_cast<int>(coords.rows()); }
  int m() const { return static_cast<int>(coords.cols()); }
  Eigen::VectorXd row(int i) const { return coords.row(i).transpose(); }
};

/// Thrown by eig_lanczos when the requested residual tolerance is not met
/// within the iteration budget. Carries the best residuals achieved.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string what, std::vector<double> residuals)
      : std::runtime_error(std::move(what)), residuals(std::move(residuals)) {}
  std::vector<double> residuals;
};

/// Flips column signs so the entry of largest absolute value (ties: lowest
/// index) is nonnegative.
void canonicalize_signs(Eigen::MatrixXd& vectors);

/// Exact m lowest eigenpairs of a symmetric matrix, sign-canonicalized.
/// Throws std::invalid_argument if the input is not symmetric within 1e-12.
Spectrum eig_dense(const Eigen::MatrixXd& sym, int m);

/// Applies the operator: out = L * in. `out` is pre-sized to n.
using LinearOp = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

/// Approximate m lowest eigenpairs of a symmetric linear operator via
/// Lanczos iteration with full reorthogonalization. Handles eigenvalue
/// multiplicity through deflated restarts. Deterministic given rng.
Spectrum eig_lanczos(const LinearOp& op, int n, int m, double tol, int max_iter,
                     Rng& rng);

/// Default kernel/nonkernel split: 1e-8 times the largest retained
/// eigenvalue (at least 1e-8).
double default_zero_tol(const Spectrum& spec);

/// Assembles per-node rotary coordinates from a spectrum.
/// kRaw: r_i[k] = u_k[i] (the constant column dropped when skip_trivial).
/// kResistanceScaled: r_i[k] = u_k[i] / sqrt(lambda_k), restricted to
/// eigenvalues >= zero_tol.
SpectralCoords spectral_features(const Spectrum& spec, FeatureVariant variant,
                                 bool skip_trivial, double zero_tol);

/// Effective resistance R(i, j) from the Laplacian pseudoinverse.
/// Throws std::domain_error when i and j lie in different components.
double effective_resistance(const Eigen::MatrixXd& lap, int i, int j);

}  // namespace wire
