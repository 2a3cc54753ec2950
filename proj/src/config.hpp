#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>

#include "model.hpp"
#include "simulate.hpp"

namespace gibbsfit {

/// Parsed run configuration: the model plus optional [data], [fit] and
/// [simulate] settings. `echo` holds the normalized key/value view that
/// output files embed so a run is reproducible from its outputs.
struct FileConfig {
  ModelSpec model;
  std::optional<std::vector<double>> theta;
  std::optional<Window> data_window;

  std::optional<double> dvee;
  std::optional<double> cell;
  std::optional<double> level;
  std::optional<int> grid_nx;
  std::optional<int> grid_ny;
  std::optional<int> mark_nodes;
  std::optional<int> threads;

  std::optional<Window> sim_window;
  std::optional<long long> steps;
  std::optional<long long> burn_in;
  std::optional<std::uint64_t> seed;
  std::optional<double> p_birth;
  std::optional<double> p_death;
  std::optional<double> p_move;

  std::string echo_json;  // serialized normalized view

  FileConfig(ModelSpec m) : model(std::move(m)) {}
};

/// Loads TOML (default) or JSON (".json" extension) configuration.
FileConfig load_config(const std::string& path);
FileConfig parse_config(const std::string& text, bool json);

}  // namespace gibbsfit
