#include "wire/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wire {

namespace {

Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const Json& j) {
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return Mat(0, 0);
  const int cols = static_cast<int>(j.at(0).size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j.at(i).size()) != cols)
      throw std::invalid_argument("ragged matrix in json");
    for (int c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

}  // namespace

Json graph_to_json(const Graph& g) {
  Json j;
  j["n"] = g.n_nodes();
  Json edges = Json::array();
  for (const auto& e : g.edges()) edges.push_back(Json::array({e[0], e[1]}));
  j["edges"] = std::move(edges);
  if (g.colors()) j["colors"] = *g.colors();
  if (g.points()) {
    Json pts = Json::array();
    for (const auto& p : *g.points()) pts.push_back(Json::array({p[0], p[1], p[2]}));
    j["points"] = std::move(pts);
  }
  return j;
}

Graph graph_from_json(const Json& j) {
  const int n = j.at("n").get<int>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges"))
    edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  Graph g = Graph::from_edges(n, std::move(edges));
  if (j.contains("colors")) g.set_colors(j.at("colors").get<std::vector<int>>());
  if (j.contains("points")) {
    std::vector<Point3> pts;
    for (const auto& p : j.at("points"))
      pts.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    g.set_points(std::move(pts));
  }
  return g;
}

Json coords_to_json(const SpectralCoords& coords) {
  Json j;
  j["m"] = coords.m();
  j["variant"] = coords.variant == FeatureVariant::kRaw ? "raw" : "resistance";
  j["coords"] = matrix_to_json(coords.coords);
  j["eigenvalues"] = vector_to_json(coords.eigenvalues);
  return j;
}

SpectralCoords coords_from_json(const Json& j) {
  SpectralCoords coords;
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "raw") coords.variant = FeatureVariant::kRaw;
  else if (variant == "resistance") coords.variant = FeatureVariant::kResistanceScaled;
  else throw std::invalid_argument("unknown coords variant: " + variant);
  coords.coords = matrix_from_json(j.at("coords"));
  coords.eigenvalues = vector_from_json(j.at("eigenvalues"));
  if (coords.m() != j.at("m").get<int>())
    throw std::invalid_argument("coords width disagrees with declared m");
  return coords;
}

namespace {

Json example_to_json(const TaskExample& ex) {
  Json j;
  j["graph"] = graph_to_json(ex.graph);
  j["label"] = ex.label;
  SpectralCoords sc;
  sc.coords = ex.coords;
  sc.eigenvalues = Eigen::VectorXd::Zero(ex.coords.cols());
  sc.variant = FeatureVariant::kRaw;
  sc.skip_trivial = true;
  j["coords"] = matrix_to_json(ex.coords);
  if (ex.source >= 0) {
    j["source"] = ex.source;
    j["target"] = ex.target;
  }
  return j;
}

TaskExample example_from_json(const Json& j, Task task, int n_colors) {
  TaskExample ex;
  ex.graph = graph_from_json(j.at("graph"));
  ex.label = j.at("label").get<double>();
  ex.coords = matrix_from_json(j.at("coords"));
  const int n = ex.graph.n_nodes();
  if (task == Task::kShortestPath) {
    ex.source = j.at("source").get<int>();
    ex.target = j.at("target").get<int>();
    Mat markers = Mat::Zero(n, 2);
    markers(ex.source, 0) = 1.0;
    markers(ex.target, 1) = 1.0;
    ex.features.resize(n, ex.coords.cols() + 2);
    ex.features << ex.coords, markers;
  } else {
    if (!ex.graph.colors()) throw std::invalid_argument("mono example lacks colors");
    Mat one_hot = Mat::Zero(n, n_colors);
    for (int v = 0; v < n; ++v) one_hot(v, (*ex.graph.colors())[v]) = 1.0;
    ex.features.resize(n, ex.coords.cols() + n_colors);
    ex.features << ex.coords, one_hot;
  }
  return ex;
}

}  // namespace

Json dataset_to_json(const TaskDataset& ds) {
  Json j;
  j["task"] = task_name(ds.task);
  j["graph_n"] = ds.graph_n;
  if (ds.task == Task::kMonoSubgraph) j["n_colors"] = ds.n_colors;
  Json train = Json::array(), test = Json::array();
  for (const auto& ex : ds.train) train.push_back(example_to_json(ex));
  for (const auto& ex : ds.test) test.push_back(example_to_json(ex));
  j["train"] = std::move(train);
  j["test"] = std::move(test);
  return j;
}

TaskDataset dataset_from_json(const Json& j) {
  TaskDataset ds;
  ds.task = task_from_name(j.at("task").get<std::string>());
  ds.graph_n = j.at("graph_n").get<int>();
  ds.n_colors = j.value("n_colors", 0);
  for (const auto& e : j.at("train"))
    ds.train.push_back(example_from_json(e, ds.task, ds.n_colors));
  for (const auto& e : j.at("test"))
    ds.test.push_back(example_from_json(e, ds.task, ds.n_colors));
  return ds;
}

Json checkpoint_to_json(const std::vector<std::pair<std::string, Mat>>& params) {
  Json j = Json::object();
  for (const auto& [name, value] : params) {
    Json entry;
    entry["shape"] = Json::array({value.rows(), value.cols()});
    Json flat = Json::array();
    for (int r = 0; r < value.rows(); ++r)
      for (int c = 0; c < value.cols(); ++c) flat.push_back(value(r, c));
    entry["values"] = std::move(flat);
    j[name] = std::move(entry);
  }
  return j;
}

std::vector<std::pair<std::string, Mat>> checkpoint_from_json(const Json& j) {
  std::vector<std::pair<std::string, Mat>> out;
  for (const auto& [name, entry] : j.items()) {
    const int rows = entry.at("shape").at(0).get<int>();
    const int cols = entry.at("shape").at(1).get<int>();
    const auto& flat = entry.at("values");
    if (static_cast<int>(flat.size()) != rows * cols)
      throw std::invalid_argument("checkpoint size mismatch for " + name);
    Mat value(rows, cols);
    int idx = 0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) value(r, c) = flat.at(idx++).get<double>();
    out.emplace_back(name, std::move(value));
  }
  return out;
}

std::string train_log_to_jsonl(const TrainLog& log) {
  std::ostringstream out;
  for (const auto& rec : log.epochs) {
    Json j;
    j["epoch"] = rec.epoch;
    j["train_loss"] = rec.train_loss;
    j["test_rmse"] = rec.test_rmse;
    j["lr"] = rec.lr;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::string grid_to_csv(const std::vector<GridCellResult>& cells,
                        bool include_timing) {
  std::ostringstream out;
  out << "task,m,n_delete,seed,best_test_rmse,epochs,wall_seconds\n";
  for (const auto& c : cells) {
    out << task_name(c.task) << "," << c.m << "," << c.n_delete << "," << c.seed
        << "," << Json(c.best_test_rmse).dump() << "," << c.epochs << ",";
    if (include_timing) out << Json(c.wall_seconds).dump();
    else out << 0;
    out << "\n";
  }
  return out.str();
}

Json grid_to_json(const std::vector<GridCellResult>& cells, bool include_timing) {
  Json rows = Json::array();
  for (const auto& c : cells) {
    Json j;
    j["task"] = task_name(c.task);
    j["m"] = c.m;
    j["n_delete"] = c.n_delete;
    j["seed"] = c.seed;
    j["best_test_rmse"] = c.best_test_rmse;
    j["epochs"] = c.epochs;
    j["wall_seconds"] = include_timing ? c.wall_seconds : 0.0;
    rows.push_back(std::move(j));
  }
  Json aggs = Json::array();
  for (const auto& a : aggregate_grid(cells)) {
    Json j;
    j["task"] = task_name(a.task);
    j["m"] = a.m;
    j["n_delete"] = a.n_delete;
    j["mean_rmse"] = a.mean_rmse;
    j["stderr_rmse"] = a.stderr_rmse;
    j["n_seeds"] = a.n_seeds;
    aggs.push_back(std::move(j));
  }
  Json out;
  out["cells"] = std::move(rows);
  out["aggregates"] = std::move(aggs);
  return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << contents;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

Json read_json_file(const std::string& path) {
  return Json::parse(read_text_file(path));
}

}  // namespace wire
