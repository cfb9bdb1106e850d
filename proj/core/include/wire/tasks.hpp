#pragma once

#include <span>
#include <string>
#include <vector>

#include "wire/graph.hpp"
#include "wire/nn.hpp"
#include "wire/rng.hpp"
#include "wire/spectral.hpp"

namespace wire {

/// Number of spectral input columns fed to the model (zero-padded when the
/// graph has fewer nontrivial eigenvectors).
inline constexpr int kInputSpectralDim = 10;

enum class Task { kMonoSubgraph, kShortestPath };

std::string task_name(Task task);
Task task_from_name(const std::string& name);

/// One labelled graph with precomputed spectral coordinates (raw variant,
/// trivial column skipped, kInputSpectralDim columns) and assembled model
/// input features. source/target are set for the shortest-path task only.
struct TaskExample {
  Graph graph;
  Mat coords;    // n x kInputSpectralDim
  Mat features;  // n x (kInputSpectralDim + task channels)
  double label = 0.0;
  int source = -1;
  int target = -1;
};

struct TaskDataset {
  Task task = Task::kMonoSubgraph;
  int graph_n = 0;
  int n_colors = 0;  // mono task only
  std::vector<TaskExample> train;
  std::vector<TaskExample> test;
};

/// Spectral input block shared by both tasks.
Mat input_spectral_block(const Graph& g);

/// Monochromatic-subgraph task: rows x cols grids (5x5 by default) with
/// n_delete edges removed and uniform random colors; labels from the
/// component oracle.
TaskDataset build_mono_dataset(int n_train, int n_test, int n_delete,
                               int n_colors, const Rng& rng, int rows = 5,
                               int cols = 5);

/// Shortest-path task: Watts-Strogatz graphs (N=10, k=2), uniform
/// source != target resampled until reachable; labels are BFS hop counts.
TaskDataset build_spd_dataset(int n_train, int n_test, double rewire_p,
                              const Rng& rng);

/// sqrt(mean((pred - label)^2)) / graph_n.
double normalized_rmse(std::span<const double> preds,
                       std::span<const double> labels, int graph_n);

/// Converts task examples to training examples with the first wire_m
/// spectral columns as rotary coordinates.
std::vector<Example> to_examples(const std::vector<TaskExample>& examples,
                                 int wire_m);

struct ExperimentGrid {
  Task task = Task::kShortestPath;
  std::vector<int> m_values = {0, 3, 5, 10};
  std::vector<int> delete_values = {0, 5, 10, 15};  // mono task only
  int seeds = 4;
  int n_train = 2000;
  int n_test = 500;
  int n_colors = 3;
  double rewire_p = 0.6;
  TrainOptions train_opts;
};

struct GridCellResult {
  Task task = Task::kShortestPath;
  int m = 0;
  int n_delete = 0;  // -1 for the shortest-path task
  int seed = 0;
  double best_test_rmse = 0.0;
  int epochs = 0;
  double wall_seconds = 0.0;
};

/// Mean and standard error of best RMSE over seeds for one (m, n_delete).
struct GridAggregate {
  Task task = Task::kShortestPath;
  int m = 0;
  int n_delete = 0;
  double mean_rmse = 0.0;
  double stderr_rmse = 0.0;
  int n_seeds = 0;
};

/// Sample standard error: sqrt(sum((x - mean)^2) / (n - 1)) / sqrt(n).
double sample_stderr(std::span<const double> values);

/// Trains every (m, n_delete, seed) cell. Datasets are shared across cells
/// with the same (task, n_delete); training seeds vary per cell. Cells run
/// on up to n_threads workers; results are ordered by cell regardless of
/// execution order. n_threads <= 0 reads WIRE_NUM_THREADS, defaulting to
/// the hardware concurrency.
std::vector<GridCellResult> run_grid(const ExperimentGrid& grid,
                                     const ModelConfig& base_cfg, const Rng& rng,
                                     int n_threads = 0);

std::vector<GridAggregate> aggregate_grid(const std::vector<GridCellResult>& cells);

}  // namespace wire
