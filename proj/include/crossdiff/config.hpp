#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>

#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/stepper.hpp"

namespace crossdiff {

using json = nlohmann::json;

struct GaussianBump {
  int species = 0;
  std::array<double, 2> center{0.5, 0.5};
  double width = 0.1;
  double amplitude = 1.0;
};

struct InitialConfig {
  std::string type = "constant";  // constant | gaussian | file
  Vec constant_values;            // per species
  Vec baseline;                   // gaussian: per-species offset
  std::vector<GaussianBump> bumps;
  std::string path;               // file: CSV snapshot

  Field build(const Mesh& mesh, int species) const;
};

struct MeshConfig {
  int dim = 1;
  std::array<double, 2> extents{1.0, 1.0};
  std::array<int, 2> n{128, 0};

  Mesh build() const;
};

struct OutputConfig {
  std::string dir = "out";
  int snapshot_stride = 1;
  bool strict = false;
};

struct RunConfig {
  ModelSpec model;
  MeshConfig mesh;
  TimeGrid time;
  InitialConfig initial;
  SolverSettings solver;
  OutputConfig output;
  std::uint64_t seed = 0;
  int audit_samples = 10000;
};

json model_to_json(const ModelSpec& model);
ModelSpec model_from_json(const json& j);

json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const json& j);
RunConfig load_config(const std::string& path);

// CSV field snapshots: coordinates first, then u_1..u_I per row.
void write_field_csv(std::ostream& os, const Mesh& mesh, const Field& U);
Field read_field_csv(std::istream& is, const Mesh& mesh, int species);

json ledger_row_to_json(const LedgerRow& row);

}  // namespace crossdiff
