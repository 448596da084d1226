#include "hybridsim/cli_config.hpp"

#include <algorithm>
#include <set>

namespace hybridsim {

namespace {

const std::set<std::string> kModes = {
    "hme-discrete",      "hme-grid",          "unravel-jump",
    "unravel-diffusive", "unravel-monitored", "validate"};

struct Checker {
  std::vector<SchemaViolation>& out;
  void fail(const std::string& ptr, const std::string& msg) {
    out.push_back({ptr, msg});
  }
};

}  // namespace

bool is_stochastic_mode(const std::string& mode) {
  return mode.rfind("unravel-", 0) == 0;
}

std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    result.violations.push_back({"/", std::string("not valid JSON: ") + e.what()});
    return result;
  }
  RunConfig cfg;
  cfg.raw = j;
  std::vector<SchemaViolation>& v = result.violations;
  Checker chk{v};

  // model
  if (!j.contains("model")) {
    chk.fail("/model", "required");
  } else if (j["model"].is_string()) {
    cfg.model_preset = j["model"].get<std::string>();
  } else if (j["model"].is_object() && j["model"].contains("file") &&
             j["model"]["file"].is_string()) {
    cfg.model_file = j["model"]["file"].get<std::string>();
  } else {
    chk.fail("/model", "must be a preset string or {\"file\": path}");
  }

  // mode
  if (!j.contains("mode") || !j["mode"].is_string()) {
    chk.fail("/mode", "required string");
  } else {
    cfg.mode = j["mode"].get<std::string>();
    if (!kModes.count(cfg.mode)) chk.fail("/mode", "unknown mode " + cfg.mode);
  }

  // numerics
  if (j.contains("numerics")) {
    const auto& n = j["numerics"];
    if (!n.is_object()) {
      chk.fail("/numerics", "must be an object");
    } else {
      if (n.contains("dt")) {
        if (!n["dt"].is_number() || n["dt"].get<double>() <= 0)
          chk.fail("/numerics/dt", "must be a positive number");
        else
          cfg.dt = n["dt"].get<double>();
      }
      if (n.contains("t_end")) {
        if (!n["t_end"].is_number() || n["t_end"].get<double>() < 0)
          chk.fail("/numerics/t_end", "must be a non-negative number");
        else
          cfg.t_end = n["t_end"].get<double>();
      }
      if (n.contains("n_trajectories")) {
        if (!n["n_trajectories"].is_number_integer() ||
            n["n_trajectories"].get<long>() < 1)
          chk.fail("/numerics/n_trajectories", "must be a positive integer");
        else
          cfg.n_trajectories = n["n_trajectories"].get<int>();
      }
      if (n.contains("master_seed")) {
        if (!n["master_seed"].is_number_integer())
          chk.fail("/numerics/master_seed", "must be an integer");
        else
          cfg.master_seed = n["master_seed"].get<std::uint64_t>();
      }
      if (n.contains("compare_hme")) {
        if (!n["compare_hme"].is_boolean())
          chk.fail("/numerics/compare_hme", "must be a boolean");
        else
          cfg.compare_hme = n["compare_hme"].get<bool>();
      }
      if (n.contains("grid")) {
        const auto& g = n["grid"];
        bool ok = g.is_object() && g.contains("nodes") && g.contains("origin") &&
                  g.contains("extent");
        if (ok) {
          try {
            GridSpec spec;
            spec.dims = g["nodes"].get<std::vector<int>>();
            spec.origin = g["origin"].get<std::vector<double>>();
            auto extent = g["extent"].get<std::vector<double>>();
            if (g.contains("periodic"))
              spec.periodic = g["periodic"].get<std::vector<bool>>();
            else
              spec.periodic.assign(spec.dims.size(), true);
            if (extent.size() != spec.dims.size() ||
                spec.origin.size() != spec.dims.size() ||
                spec.periodic.size() != spec.dims.size())
              throw std::runtime_error("axis lists disagree");
            spec.spacing.resize(spec.dims.size());
            for (size_t k = 0; k < spec.dims.size(); ++k) {
              if (spec.dims[k] < 3) throw std::runtime_error("need >=3 nodes");
              spec.spacing[k] = spec.periodic[k]
                                    ? extent[k] / spec.dims[k]
                                    : extent[k] / (spec.dims[k] - 1);
            }
            cfg.grid = std::move(spec);
          } catch (const std::exception& e) {
            chk.fail("/numerics/grid", e.what());
          }
        } else {
          chk.fail("/numerics/grid", "needs nodes, origin, extent arrays");
        }
      }
    }
  }

  // noise
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    if (!n.is_object()) {
      chk.fail("/noise", "must be an object");
    } else {
      if (n.contains("xi_xi_choice")) {
        const std::string c = n["xi_xi_choice"].is_string()
                                  ? n["xi_xi_choice"].get<std::string>()
                                  : std::string();
        if (c == "zero")
          cfg.noise.choice = XiXiChoice::Zero;
        else if (c == "monitored")
          cfg.noise.choice = XiXiChoice::Monitored;
        else if (c == "custom")
          cfg.noise.choice = XiXiChoice::Custom;
        else
          chk.fail("/noise/xi_xi_choice", "one of zero|monitored|custom");
      }
      if (cfg.noise.choice == XiXiChoice::Custom) {
        if (!n.contains("custom_C")) {
          chk.fail("/noise/custom_C", "required for the custom choice");
        } else {
          try {
            cfg.noise.custom_C = matrix_from_json(n["custom_C"]);
          } catch (const std::exception& e) {
            chk.fail("/noise/custom_C", e.what());
          }
        }
      }
      if (n.contains("level")) {
        const std::string l =
            n["level"].is_string() ? n["level"].get<std::string>() : "";
        if (l == "full")
          cfg.noise.level = QuantumNoiseLevel::Full;
        else if (l == "reduced-min")
          cfg.noise.level = QuantumNoiseLevel::ReducedMin;
        else
          chk.fail("/noise/level", "one of full|reduced-min");
      }
      if (n.contains("eta")) {
        if (!n["eta"].is_number() || n["eta"].get<double>() <= 0 ||
            n["eta"].get<double>() > 1.0)
          chk.fail("/noise/eta", "must lie in (0, 1]");
        else
          cfg.noise.eta = n["eta"].get<double>();
      }
    }
  }

  // initial
  if (j.contains("initial")) {
    const auto& n = j["initial"];
    if (n.is_object() && n.contains("state_file") &&
        n["state_file"].is_string())
      cfg.initial_state_file = n["state_file"].get<std::string>();
    else if (n.is_object() && n.contains("preset") && n["preset"].is_string())
      cfg.initial_preset = n["preset"].get<std::string>();
    else
      chk.fail("/initial", "needs state_file or preset");
  }

  // output
  if (j.contains("output")) {
    const auto& n = j["output"];
    if (!n.is_object()) {
      chk.fail("/output", "must be an object");
    } else {
      if (n.contains("dir")) {
        if (!n["dir"].is_string() || n["dir"].get<std::string>().empty())
          chk.fail("/output/dir", "must be a non-empty string");
        else
          cfg.out_dir = n["dir"].get<std::string>();
      }
      if (n.contains("sample_times")) {
        try {
          cfg.sample_times = n["sample_times"].get<std::vector<double>>();
          for (double t : cfg.sample_times)
            if (t < 0) throw std::runtime_error("sample times must be >= 0");
        } catch (const std::exception& e) {
          chk.fail("/output/sample_times", e.what());
        }
      }
      if (n.contains("csv")) {
        if (!n["csv"].is_boolean())
          chk.fail("/output/csv", "must be a boolean");
        else
          cfg.csv = n["csv"].get<bool>();
      }
      if (n.contains("record_noise")) {
        if (!n["record_noise"].is_boolean())
          chk.fail("/output/record_noise", "must be a boolean");
        else
          cfg.record_noise = n["record_noise"].get<bool>();
      }
    }
  }

  // cross-field rules
  if (!cfg.mode.empty() && kModes.count(cfg.mode)) {
    if (is_stochastic_mode(cfg.mode)) {
      if (!cfg.master_seed)
        chk.fail("/numerics/master_seed", "required for stochastic modes");
      if (cfg.n_trajectories < 1)
        chk.fail("/numerics/n_trajectories", "required for stochastic modes");
    }
    const bool needs_grid = cfg.mode == "hme-grid" ||
                            cfg.mode == "unravel-diffusive" ||
                            cfg.mode == "unravel-monitored";
    if (needs_grid && !cfg.grid && cfg.model_file.empty())
      chk.fail("/numerics/grid", "required for grid-based modes on presets");
  }

  if (cfg.sample_times.empty()) cfg.sample_times = {cfg.t_end};
  std::sort(cfg.sample_times.begin(), cfg.sample_times.end());

  if (v.empty()) result.config = std::move(cfg);
  return result;
}

}  // namespace hybridsim
