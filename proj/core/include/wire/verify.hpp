#pragma once

#include <string>
#include <vector>

#include "wire/serialize.hpp"

namespace wire {

/// One property check: the measured statistic, the bound it must satisfy,
/// and auxiliary data for the JSON report.
struct CheckResult {
  std::string check;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  Json extra = Json::object();
};

/// Grid-graph eigenvector cosines and rotary-logit equality with 1D/2D
/// rotary encodings on cosine-transformed positions (P_16 and a 4x6 grid).
std::vector<CheckResult> verify_thm1();

/// Monte-Carlo check that random-frequency rotations downweight logits by
/// 1 - omega^2 R(i,j) / 2, with a fourth-order remainder, on a fixed
/// connected 8-node graph.
std::vector<CheckResult> verify_thm2(int n_samples = 1000000);

/// Fast Hadamard rotary path agrees with the blockwise form over fuzzed
/// inputs. inject_fault negates the fast-path angles; the suite must then
/// fail (mutation test).
std::vector<CheckResult> verify_eq5(bool inject_fault = false);

/// Node-relabeling equivariance: Laplacian entries, spectral projectors,
/// every attention op, and full-model predictions.
std::vector<CheckResult> verify_perm();

/// Rigid-motion invariance of kNN graphs, their spectra, and rotary-softmax
/// outputs over random point clouds.
std::vector<CheckResult> verify_se3();

/// Streaming linear attention equals the explicit quadratic evaluation, and
/// its auxiliary memory is O(d^2) independent of N.
std::vector<CheckResult> verify_linear();

/// Runs one named suite ("thm1", "thm2", "eq5", "perm", "se3", "linear") or
/// "all". Throws std::invalid_argument on unknown names.
std::vector<CheckResult> verify_suite(const std::string& name,
                                      int thm2_samples = 1000000);

bool all_passed(const std::vector<CheckResult>& results);
Json report_to_json(const std::vector<CheckResult>& results);

}  // namespace wire
