#include "wire/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace wire {

void canonicalize_signs(Eigen::MatrixXd& vectors) {
  for (int c = 0; c < vectors.cols(); ++c) {
    int arg = 0;
    double best = -1.0;
    for (int r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, c));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

Spectrum eig_dense(const Eigen::MatrixXd& sym, int m) {
  const int n = static_cast<int>(sym.rows());
  if (sym.cols() != n) throw std::invalid_argument("matrix must be square");
  if (m < 1 || m > n) throw std::invalid_argument("need 1 <= m <= n");
  const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
  if (((sym - sym.transpose()).cwiseAbs().maxCoeff()) > 1e-12 * scale)
    throw std::invalid_argument("matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("dense eigensolver failed to converge");

  Spectrum spec;
  spec.eigenvalues = solver.eigenvalues().head(m);
  spec.eigenvectors = solver.eigenvectors().leftCols(m);
  canonicalize_signs(spec.eigenvectors);
  spec.sign_canonical = true;
  return spec;
}

namespace {

// One Lanczos sweep from start vector v0, fully reorthogonalized against
// both the growing Krylov basis and the already-locked vectors. Returns
// Ritz pairs of the sweep's tridiagonal restricted to the Krylov basis.
struct SweepResult {
  std::vector<double> values;
  std::vector<Eigen::VectorXd> vectors;
  std::vector<double> residual_bounds;
  bool invariant = false;  // breakdown: Krylov space is exhausted
};

SweepResult lanczos_sweep(const LinearOp& op, const Eigen::VectorXd& v0,
                          const std::vector<Eigen::VectorXd>& locked,
                          int max_steps, double breakdown_tol) {
  const int n = static_cast<int>(v0.size());
  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;  // beta[j] links basis[j] and basis[j+1]
  Eigen::VectorXd v = v0, w(n);

  auto reorth = [&](Eigen::VectorXd& x) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : locked) x -= (q.dot(x)) * q;
      for (const auto& q : basis) x -= (q.dot(x)) * q;
    }
  };

  SweepResult result;
  for (int j = 0; j < max_steps; ++j) {
    basis.push_back(v);
    op(v, w);
    alpha.push_back(v.dot(w));
    reorth(w);
    const double b = w.norm();
    if (b <= breakdown_tol) {
      result.invariant = true;
      break;
    }
    beta.push_back(b);
    v = w / b;
  }

  const int k = static_cast<int>(basis.size());
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    tri(j, j) = alpha[j];
    if (j + 1 < k) tri(j, j + 1) = tri(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(tri);
  const double last_beta =
      (!result.invariant && k <= static_cast<int>(beta.size())) ? beta[k - 1] : 0.0;
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd ritz = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < k; ++j) ritz += small.eigenvectors()(j, c) * basis[j];
    result.values.push_back(small.eigenvalues()[c]);
    result.vectors.push_back(std::move(ritz));
    result.residual_bounds.push_back(
        result.invariant ? 0.0
                         : std::abs(last_beta * small.eigenvectors()(k - 1, c)));
  }
  return result;
}

}  // namespace

Spectrum eig_lanczos(const LinearOp& op, int n, int m, double tol, int max_iter,
                     Rng& rng) {
  if (m < 1 || m > n) throw std::invalid_argument("need 1 <= m <= n");
  const double breakdown_tol = 1e-13 * std::max(1, n);

  std::vector<Eigen::VectorXd> locked_vecs;
  std::vector<double> locked_vals;
  std::vector<double> best_residuals;
  int budget = max_iter;

  Eigen::VectorXd out(n);
  auto true_residual = [&](double value, const Eigen::VectorXd& vec) {
    op(vec, out);
    return (out - value * vec).norm() / std::max(1.0, std::abs(value));
  };

  while (static_cast<int>(locked_vecs.size()) < m && budget > 0) {
    // Random start orthogonal to everything already locked.
    Eigen::VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0[i] = rng.gaussian();
    for (const auto& q : locked_vecs) v0 -= (q.dot(v0)) * q;
    const double nrm = v0.norm();
    if (nrm <= breakdown_tol) break;  // space exhausted
    v0 /= nrm;

    const int steps = std::min(budget, n);
    auto sweep = lanczos_sweep(op, v0, locked_vecs, steps, breakdown_tol);
    budget -= steps;

    // Lock converged Ritz pairs, lowest first.
    std::vector<int> order(sweep.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return sweep.values[a] < sweep.values[b]; });
    best_residuals.clear();
    for (int idx : order) {
      if (static_cast<int>(locked_vecs.size()) >= m) break;
      const double bound = sweep.residual_bounds[idx];
      const double res = true_residual(sweep.values[idx], sweep.vectors[idx]);
      best_residuals.push_back(res);
      if (std::max(bound, res) > tol) continue;
      Eigen::VectorXd vec = sweep.vectors[idx];
      for (const auto& q : locked_vecs) vec -= (q.dot(vec)) * q;
      const double vn = vec.norm();
      if (vn < 0.5) continue;  // collapsed onto locked space
      locked_vecs.push_back(vec / vn);
      locked_vals.push_back(sweep.values[idx]);
    }
    if (sweep.invariant && static_cast<int>(sweep.values.size()) >= n) break;
  }

  if (static_cast<int>(locked_vecs.size()) < m)
    throw ConvergenceError("lanczos did not reach tolerance within max_iter",
                           best_residuals);

  std::vector<int> order(locked_vals.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return locked_vals[a] < locked_vals[b]; });

  Spectrum spec;
  spec.eigenvalues.resize(m);
  spec.eigenvectors.resize(n, m);
  for (int c = 0; c < m; ++c) {
    spec.eigenvalues[c] = locked_vals[order[c]];
    spec.eigenvectors.col(c) = locked_vecs[order[c]];
  }
  canonicalize_signs(spec.eigenvectors);
  spec.sign_canonical = true;
  return spec;
}

double default_zero_tol(const Spectrum& spec) {
  const double lam_max = spec.m() > 0 ? spec.eigenvalues[spec.m() - 1] : 0.0;
  return 1e-8 * std::max(1.0, lam_max);
}

SpectralCoords spectral_features(const Spectrum& spec, FeatureVariant variant,
                                 bool skip_trivial, double zero_tol) {
  std::vector<int> keep;
  for (int k = 0; k < spec.m(); ++k) {
    const bool near_zero = spec.eigenvalues[k] < zero_tol;
    if (variant == FeatureVariant::kResistanceScaled) {
      if (!near_zero) keep.push_back(k);
    } else {
      if (skip_trivial && k == 0) continue;
      keep.push_back(k);
    }
  }
  if (variant == FeatureVariant::kResistanceScaled && keep.empty())
    throw std::invalid_argument(
        "resistance-scaled features require a positive eigenvalue");

  SpectralCoords sc;
  sc.variant = variant;
  sc.skip_trivial = skip_trivial;
  sc.coords.resize(spec.n(), static_cast<int>(keep.size()));
  sc.eigenvalues.resize(static_cast<int>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const int k = keep[c];
    sc.eigenvalues[static_cast<int>(c)] = spec.eigenvalues[k];
    if (variant == FeatureVariant::kResistanceScaled)
      sc.coords.col(static_cast<int>(c)) =
          spec.eigenvectors.col(k) / std::sqrt(spec.eigenvalues[k]);
    else
      sc.coords.col(static_cast<int>(c)) = spec.eigenvectors.col(k);
  }
  return sc;
}

double effective_resistance(const Eigen::MatrixXd& lap, int i, int j) {
  const int n = static_cast<int>(lap.rows());
  if (i < 0 || i >= n || j < 0 || j >= n)
    throw std::invalid_argument("node index out of range");
  if (i == j) return 0.0;

  // Components from the off-diagonal sparsity pattern.
  std::vector<int> comp(n, -1);
  std::deque<int> queue;
  int n_comp = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = n_comp;
    queue.push_back(s);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int u = 0; u < n; ++u)
        if (u != v && comp[u] < 0 && std::abs(lap(v, u)) > 1e-14) {
          comp[u] = n_comp;
          queue.push_back(u);
        }
    }
    ++n_comp;
  }
  if (comp[i] != comp[j])
    throw std::domain_error("effective resistance is infinite across components");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  const double zero_tol = 1e-8 * std::max(1.0, solver.eigenvalues()[n - 1]);
  double r = 0.0;
  for (int k = 0; k < n; ++k) {
    const double lam = solver.eigenvalues()[k];
    if (lam < zero_tol) continue;
    const double diff = solver.eigenvectors()(i, k) - solver.eigenvectors()(j, k);
    r += diff * diff / lam;
  }
  return r;
}

}  // namespace wire
