#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "wire/graph.hpp"
#include "wire/nn.hpp"
#include "wire/spectral.hpp"
#include "wire/tasks.hpp"

namespace wire {

using Json = nlohmann::json;

// Graph interchange: {"n": N, "edges": [[i,j],...], "colors": [...]?,
// "points": [[x,y,z],...]?} with edges sorted lexicographically, i < j.
Json graph_to_json(const Graph& g);
Graph graph_from_json(const Json& j);

// Coordinates: {"m": m, "variant": "raw"|"resistance", "coords": [[...]],
// "eigenvalues": [...]}.
Json coords_to_json(const SpectralCoords& coords);
SpectralCoords coords_from_json(const Json& j);

Json dataset_to_json(const TaskDataset& ds);
TaskDataset dataset_from_json(const Json& j);

// Checkpoint: flat map name -> {"shape": [r, c], "values": row-major flat}.
Json checkpoint_to_json(const std::vector<std::pair<std::string, Mat>>& params);
std::vector<std::pair<std::string, Mat>> checkpoint_from_json(const Json& j);

// Training log: JSON-lines, one record per epoch.
std::string train_log_to_jsonl(const TrainLog& log);

// Grid results: CSV columns task,m,n_delete,seed,best_test_rmse,epochs,
// wall_seconds; JSON mirror carries per-cell rows plus aggregates.
std::string grid_to_csv(const std::vector<GridCellResult>& cells,
                        bool include_timing = true);
Json grid_to_json(const std::vector<GridCellResult>& cells,
                  bool include_timing = true);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace wire
