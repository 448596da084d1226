#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hybridsim/diffusive_unraveling.hpp"
#include "hybridsim/serialize.hpp"

namespace hybridsim {

struct RunConfig {
  std::string model_preset;  // exactly one of preset / file is set
  std::string model_file;
  std::string mode;
  double dt = 1e-3;
  double t_end = 1.0;
  int n_trajectories = 0;
  std::optional<std::uint64_t> master_seed;
  std::optional<GridSpec> grid;
  bool compare_hme = false;
  NoiseSpec noise;
  std::string initial_state_file;
  std::string initial_preset;
  std::string out_dir = "out";
  std::vector<double> sample_times;
  bool csv = false;
  bool record_noise = false;
  bool allow_inadmissible = false;
  json raw;  // canonical document, hashed into the manifest
};

struct SchemaViolation {
  std::string pointer;  // JSON pointer of the offending field
  std::string message;
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<SchemaViolation> violations;
};

// Validates the whole document and reports every violation, not just the
// first.
ParseResult parse_config(const std::string& text);

bool is_stochastic_mode(const std::string& mode);

std::uint64_t fnv1a_hash(const std::string& s);

}  // namespace hybridsim
