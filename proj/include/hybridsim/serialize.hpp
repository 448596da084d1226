#pragma once

#include <optional>
#include <string>

#include "hybridsim/hybrid_state.hpp"
#include "hybridsim/model_spec.hpp"
#include "json.hpp"

namespace hybridsim {

using json = nlohmann::ordered_json;

// Complex matrices are row-major arrays of [re, im] pairs; doubles survive
// the round trip bit-exactly.
json matrix_to_json(const cmat& m);
cmat matrix_from_json(const json& j);
json rmatrix_to_json(const rmat& m);
rmat rmatrix_from_json(const json& j);

json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const json& j);

json state_to_json(const HybridStateDiscrete& s);
HybridStateDiscrete discrete_state_from_json(const json& j);
json state_to_json(const HybridStateGrid& s);
HybridStateGrid grid_state_from_json(const json& j);

json model_to_json(const DiscreteModel& m);
DiscreteModel discrete_model_from_json(const json& j);

// Diffusive file models carry per-node tables over their classical grid;
// loading binds nearest-node lookup into the field callables.
struct DiffusiveModelFile {
  GridSpec grid;
  DiffusiveModel model;
};

json diffusive_model_to_json(const DiffusiveModel& m, const GridSpec& grid);
DiffusiveModelFile diffusive_model_from_json(const json& j);

struct LoadedModel {
  std::optional<DiscreteModel> discrete;
  std::optional<DiffusiveModelFile> diffusive;
};

// Dispatches on the "classical" section: points -> discrete, grid -> diffusive.
LoadedModel model_from_json(const json& j);
LoadedModel load_model_file(const std::string& path);

json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace hybridsim
