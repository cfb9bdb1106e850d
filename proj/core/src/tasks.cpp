#include "wire/tasks.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <thread>

namespace wire {

std::string task_name(Task task) {
  return task == Task::kMonoSubgraph ? "mono" : "spd";
}

Task task_from_name(const std::string& name) {
  if (name == "mono") return Task::kMonoSubgraph;
  if (name == "spd") return Task::kShortestPath;
  throw std::invalid_argument("unknown task: " + name);
}

Mat input_spectral_block(const Graph& g) {
  const int n = g.n_nodes();
  const auto spec = eig_dense(laplacian(g), n);
  const auto coords = spectral_features(spec, FeatureVariant::kRaw, true,
                                        default_zero_tol(spec));
  Mat block = Mat::Zero(n, kInputSpectralDim);
  const int width = std::min(kInputSpectralDim, coords.m());
  block.leftCols(width) = coords.coords.leftCols(width);
  return block;
}

TaskDataset build_mono_dataset(int n_train, int n_test, int n_delete,
                               int n_colors, const Rng& rng, int rows, int cols) {
  if (n_train <= 0 || n_test <= 0 || n_colors <= 0)
    throw std::invalid_argument("dataset sizes and color count must be positive");
  TaskDataset ds;
  ds.task = Task::kMonoSubgraph;
  ds.graph_n = rows * cols;
  ds.n_colors = n_colors;

  auto make_split = [&](int count, const Rng& split_rng) {
    std::vector<TaskExample> out;
    out.reserve(count);
    for (int idx = 0; idx < count; ++idx) {
      Rng ex_rng = split_rng.substream(idx);
      TaskExample ex;
      ex.graph = gen_grid_deleted(rows, cols, n_delete, ex_rng);
      std::vector<int> colors(ds.graph_n);
      for (auto& c : colors) c = static_cast<int>(ex_rng.below(n_colors));
      ex.graph.set_colors(std::move(colors));
      ex.label = largest_monochromatic_subgraph(ex.graph);
      if (ex.label != largest_monochromatic_subgraph(ex.graph))
        throw std::logic_error("label oracle mismatch");
      ex.coords = input_spectral_block(ex.graph);
      Mat one_hot = Mat::Zero(ds.graph_n, n_colors);
      for (int v = 0; v < ds.graph_n; ++v) one_hot(v, (*ex.graph.colors())[v]) = 1.0;
      ex.features.resize(ds.graph_n, kInputSpectralDim + n_colors);
      ex.features << ex.coords, one_hot;
      out.push_back(std::move(ex));
    }
    return out;
  };
  ds.train = make_split(n_train, rng.substream("train"));
  ds.test = make_split(n_test, rng.substream("test"));
  return ds;
}

TaskDataset build_spd_dataset(int n_train, int n_test, double rewire_p,
                              const Rng& rng) {
  if (n_train <= 0 || n_test <= 0)
    throw std::invalid_argument("dataset sizes must be positive");
  constexpr int n = 10, k = 2;
  TaskDataset ds;
  ds.task = Task::kShortestPath;
  ds.graph_n = n;

  auto make_split = [&](int count, const Rng& split_rng) {
    std::vector<TaskExample> out;
    out.reserve(count);
    for (int idx = 0; idx < count; ++idx) {
      Rng ex_rng = split_rng.substream(idx);
      TaskExample ex;
      std::optional<int> dist;
      // Resample the node pair until reachable (up to 100 tries), then
      // resample the graph.
      for (;;) {
        ex.graph = gen_watts_strogatz(n, k, rewire_p, ex_rng);
        bool found = false;
        for (int tries = 0; tries < 100 && !found; ++tries) {
          ex.source = static_cast<int>(ex_rng.below(n));
          ex.target = static_cast<int>(ex_rng.below(n));
          if (ex.source == ex.target) continue;
          dist = shortest_path_distance(ex.graph, ex.source, ex.target);
          found = dist.has_value();
        }
        if (found) break;
      }
      ex.label = *dist;
      ex.coords = input_spectral_block(ex.graph);
      Mat markers = Mat::Zero(n, 2);
      markers(ex.source, 0) = 1.0;
      markers(ex.target, 1) = 1.0;
      ex.features.resize(n, kInputSpectralDim + 2);
      ex.features << ex.coords, markers;
      out.push_back(std::move(ex));
    }
    return out;
  };
  ds.train = make_split(n_train, rng.substream("train"));
  ds.test = make_split(n_test, rng.substream("test"));
  return ds;
}

double normalized_rmse(std::span<const double> preds,
                       std::span<const double> labels, int graph_n) {
  if (preds.empty() || preds.size() != labels.size())
    throw std::invalid_argument("prediction and label lengths must match");
  double sq = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double diff = preds[i] - labels[i];
    sq += diff * diff;
  }
  return std::sqrt(sq / static_cast<double>(preds.size())) / graph_n;
}

std::vector<Example> to_examples(const std::vector<TaskExample>& examples,
                                 int wire_m) {
  if (wire_m < 0 || wire_m > kInputSpectralDim)
    throw std::invalid_argument("wire_m out of range");
  std::vector<Example> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    Example e;
    e.features = ex.features;
    if (wire_m > 0) e.coords = ex.coords.leftCols(wire_m);
    e.label = ex.label;
    out.push_back(std::move(e));
  }
  return out;
}

double sample_stderr(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
}

namespace {

int resolve_threads(int n_threads) {
  if (n_threads > 0) return n_threads;
  if (const char* env = std::getenv("WIRE_NUM_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

std::vector<GridCellResult> run_grid(const ExperimentGrid& grid,
                                     const ModelConfig& base_cfg, const Rng& rng,
                                     int n_threads) {
  if (grid.m_values.empty() || grid.seeds <= 0)
    throw std::invalid_argument("experiment grid is empty");
  const std::vector<int> deletes =
      grid.task == Task::kMonoSubgraph ? grid.delete_values : std::vector<int>{-1};
  if (deletes.empty()) throw std::invalid_argument("experiment grid is empty");

  // One dataset per delete setting, shared across m values and seeds.
  std::map<int, TaskDataset> datasets;
  for (int del : deletes) {
    const Rng data_rng = rng.substream("data", static_cast<std::uint64_t>(del + 1));
    datasets.emplace(del, grid.task == Task::kMonoSubgraph
                              ? build_mono_dataset(grid.n_train, grid.n_test, del,
                                                   grid.n_colors, data_rng)
                              : build_spd_dataset(grid.n_train, grid.n_test,
                                                  grid.rewire_p, data_rng));
  }

  struct Cell {
    int m, n_delete, seed;
  };
  std::vector<Cell> cells;
  for (int m : grid.m_values)
    for (int del : deletes)
      for (int seed = 0; seed < grid.seeds; ++seed) cells.push_back({m, del, seed});

  std::vector<GridCellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      const auto& ds = datasets.at(cell.n_delete);
      ModelConfig cfg = base_cfg;
      cfg.wire_m = cell.m;
      cfg.input_dim = static_cast<int>(ds.train.front().features.cols());
      const Rng train_rng =
          rng.substream("cell")
              .substream(task_name(grid.task), static_cast<std::uint64_t>(cell.n_delete + 1))
              .substream("m", cell.m)
              .substream("seed", cell.seed);
      const auto t0 = std::chrono::steady_clock::now();
      const TrainLog log = train(cfg, to_examples(ds.train, cell.m),
                                 to_examples(ds.test, cell.m), ds.graph_n,
                                 grid.train_opts, train_rng);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      results[i] = {grid.task,           cell.m, cell.n_delete,
                    cell.seed,           log.best_test_rmse,
                    grid.train_opts.epochs, secs};
    }
  };

  const int workers = std::min<int>(resolve_threads(n_threads),
                                    static_cast<int>(cells.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

std::vector<GridAggregate> aggregate_grid(const std::vector<GridCellResult>& cells) {
  std::map<std::pair<int, int>, std::vector<double>> groups;
  std::map<std::pair<int, int>, Task> tasks;
  for (const auto& c : cells) {
    groups[{c.m, c.n_delete}].push_back(c.best_test_rmse);
    tasks[{c.m, c.n_delete}] = c.task;
  }
  std::vector<GridAggregate> out;
  for (const auto& [key, values] : groups) {
    GridAggregate agg;
    agg.task = tasks[key];
    agg.m = key.first;
    agg.n_delete = key.second;
    agg.n_seeds = static_cast<int>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    agg.mean_rmse = mean / agg.n_seeds;
    agg.stderr_rmse = sample_stderr(values);
    out.push_back(agg);
  }
  return out;
}

}  // namespace wire
