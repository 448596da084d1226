#include "hybridsim/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "hybridsim/diffusive_hme.hpp"
#include "hybridsim/discrete_hme.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/jump_unraveling.hpp"
#include "hybridsim/models.hpp"

namespace hybridsim {

void parallel_for(int n, const std::function<void(int)>& fn) {
  int nthreads = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HYBRIDSIM_THREADS"))
    nthreads = std::max(1, std::atoi(env));
  nthreads = std::max(1, std::min(nthreads, n));
  if (nthreads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

namespace {

namespace fs = std::filesystem;

struct ResolvedModel {
  std::optional<DiscreteModel> discrete;
  std::optional<DiffusiveModel> diffusive;
  std::optional<GridSpec> grid;  // classical grid for diffusive runs
  std::string name;
};

ResolvedModel resolve_model(const RunConfig& cfg) {
  ResolvedModel r;
  if (!cfg.model_preset.empty()) {
    Preset p = parse_preset(cfg.model_preset);
    r.diffusive = std::move(p.model);
    r.name = p.name;
    r.grid = cfg.grid;
  } else {
    LoadedModel m = load_model_file(cfg.model_file);
    r.name = cfg.model_file;
    if (m.discrete) {
      r.discrete = std::move(m.discrete);
    } else {
      r.diffusive = std::move(m.diffusive->model);
      r.grid = cfg.grid ? cfg.grid : std::optional<GridSpec>(m.diffusive->grid);
    }
  }
  return r;
}

json report_to_json(const ValidationReport& r) {
  json j;
  j["psd_ok"] = r.psd_ok;
  j["min_eig"] = r.min_eig;
  j["rank_block"] = r.rank_block;
  j["rank_G"] = r.rank_G;
  j["rank_DQ"] = r.rank_DQ;
  j["rank_DC"] = r.rank_DC;
  j["tol_rank"] = r.tol_rank;
  j["minimum_noise"] = r.minimum_noise;
  j["monitoring_ok"] = r.monitoring_ok;
  j["excess_diffusion_violation"] = r.excess_diffusion_violation;
  j["range_defect_quantum"] = r.range_defect_quantum;
  j["excess_decoherence_violation"] = r.excess_decoherence_violation;
  j["range_defect_classical"] = r.range_defect_classical;
  return j;
}

json psi_to_json(const cvec& psi) {
  json a = json::array();
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    a.push_back({psi(i).real(), psi(i).imag()});
  return a;
}

double mean_conditional_purity(const HybridStateDiscrete& s) {
  double purity = 0.0;
  for (const auto& b : s.blocks) {
    const double w = b.trace().real();
    if (w > 1e-12) purity += (b * b).trace().real() / w;
  }
  return purity;
}

double mean_conditional_purity(const HybridStateGrid& s) {
  double purity = 0.0;
  const double cell = s.grid.cell_volume();
  for (int i = 0; i < s.grid.num_nodes(); ++i) {
    const cmat b = s.block(i);
    const double w = b.trace().real() * cell;
    if (w > 1e-12) purity += (b * b).trace().real() / b.trace().real() * w;
  }
  return purity;
}

// ---- default initial states ------------------------------------------------

cvec plus_state() {
  cvec psi(2);
  psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return psi;
}

cvec circle_state(double x) {
  // +1 eigenvector of (cos x, 0, sin x) . sigma
  const double th = 0.5 * (1.5707963267948966 - x);
  cvec psi(2);
  psi << std::cos(th), std::sin(th);
  return psi;
}

std::string default_initial_preset(const DiffusiveModel& m) {
  if (m.dim == 2 && m.nclassical == 1) return "uniform-plus";
  return "blob";
}

HybridStateGrid initial_grid_state(const RunConfig& cfg,
                                   const DiffusiveModel& m,
                                   const GridSpec& grid) {
  if (!cfg.initial_state_file.empty())
    return grid_state_from_json(load_json_file(cfg.initial_state_file));
  std::string preset = cfg.initial_preset.empty() ? default_initial_preset(m)
                                                  : cfg.initial_preset;
  HybridStateGrid s = HybridStateGrid::zero(grid, m.dim);
  const int nn = grid.num_nodes();
  const double vol = grid.cell_volume() * nn;
  if (preset == "uniform-plus") {
    if (m.dim != 2) throw Error("uniform-plus needs a two-level model");
    const cvec psi = plus_state();
    const cmat block = (psi * psi.adjoint()) / vol;
    for (int i = 0; i < nn; ++i) s.block(i) = block;
  } else if (preset == "two-level-circle") {
    if (m.dim != 2 || grid.ndim() != 1)
      throw Error("two-level-circle needs a two-level model on a 1-D grid");
    for (int i = 0; i < nn; ++i) {
      const double x = grid.node_coords(i)[0];
      const cmat block =
          0.5 *
          (pauli(0) + std::cos(x) * pauli(1) + std::sin(x) * pauli(3)) / vol;
      s.block(i) = block;
    }
  } else if (preset == "blob") {
    std::vector<double> center(grid.ndim());
    double width = 0.0;
    for (int n = 0; n < grid.ndim(); ++n) {
      center[n] = grid.origin[n] + 0.5 * grid.dims[n] * grid.spacing[n];
      width = std::max(width, 3.0 * grid.spacing[n]);
    }
    cmat rho_q = cmat::Zero(m.dim, m.dim);
    rho_q(0, 0) = 1.0;
    concentrate(s, center, rho_q, width);
  } else {
    throw Error("unknown initial preset " + preset);
  }
  return s;
}

// Draw a trajectory start consistent with the grid default above.
TrajectoryState initial_trajectory(const RunConfig& cfg,
                                   const DiffusiveModel& m,
                                   const GridSpec& grid, Philox& rng,
                                   bool mixed) {
  std::string preset = cfg.initial_preset.empty() ? default_initial_preset(m)
                                                  : cfg.initial_preset;
  TrajectoryState t;
  t.x.resize(grid.ndim());
  cvec psi;
  if (preset == "uniform-plus" || preset == "two-level-circle") {
    for (int n = 0; n < grid.ndim(); ++n) {
      const double extent = grid.dims[n] * grid.spacing[n];
      t.x[n] = grid.origin[n] + rng.next_double() * extent;
    }
    psi = preset == "uniform-plus" ? plus_state() : circle_state(t.x[0]);
  } else if (preset == "blob") {
    double width = 0.0;
    for (int n = 0; n < grid.ndim(); ++n)
      width = std::max(width, 3.0 * grid.spacing[n]);
    for (int n = 0; n < grid.ndim(); ++n) {
      const double center =
          grid.origin[n] + 0.5 * grid.dims[n] * grid.spacing[n];
      t.x[n] = center + width * rng.next_gaussian();
    }
    psi = cvec::Zero(m.dim);
    psi(0) = 1.0;
  } else {
    throw Error("unknown initial preset " + preset);
  }
  if (mixed)
    t.sigma = psi * psi.adjoint();
  else
    t.psi = psi;
  return t;
}

// ---- output helpers ---------------------------------------------------------

void write_manifest(const RunConfig& cfg, const std::string& dir) {
  json m;
  m["config_hash"] = [&] {
    std::ostringstream os;
    os << std::hex << fnv1a_hash(cfg.raw.dump());
    return os.str();
  }();
  if (cfg.master_seed)
    m["seed"] = *cfg.master_seed;
  else
    m["seed"] = nullptr;
  m["versions"] = {{"hybridsim", "0.1.0"}, {"schema", 1}};
  write_json_file(dir + "/manifest.json", m);
}

struct SeriesRow {
  double t = 0.0;
  double trace = 0.0;
  double purity = 0.0;
  double max_se = 0.0;
};

void write_csv(const std::string& path, const std::vector<SeriesRow>& rows) {
  std::ostringstream os;
  os << "t,trace,purity,max_se\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.t << "," << r.trace << "," << r.purity << "," << r.max_se << "\n";
  write_text_file(path, os.str());
}

// ---- mode implementations ----------------------------------------------------

int run_validate(const RunConfig& cfg, const ResolvedModel& rm,
                 const std::string& dir) {
  json rep;
  bool ok = true;
  if (rm.diffusive) {
    GridSpec grid = rm.grid ? *rm.grid
                            : GridSpec::uniform_1d(64, 0.0, 6.283185307179586);
    ValidationReport r = validate_model(*rm.diffusive, grid);
    rep = report_to_json(r);
    ok = r.psd_ok;
  } else {
    const DiscreteModel& m = *rm.discrete;
    const bool indep = generators_independent(m);
    bool herm = true;
    for (const auto& h : m.H) herm = herm && is_hermitian(h, 1e-8);
    rep["generators_independent"] = indep;
    rep["hamiltonian_hermitian"] = herm;
    ok = indep && herm;
    rep["psd_ok"] = ok;
  }
  write_json_file(dir + "/report.json", rep);
  return ok ? 0 : 2;
}

int run_hme_discrete(const RunConfig& cfg, const ResolvedModel& rm,
                     const std::string& dir) {
  const DiscreteModel& m = *rm.discrete;
  HybridStateDiscrete init;
  if (!cfg.initial_state_file.empty()) {
    init = discrete_state_from_json(load_json_file(cfg.initial_state_file));
  } else {
    init = HybridStateDiscrete::zero(m.dim, m.num_points());
    init.blocks[0](0, 0) = 1.0;
  }
  DiscreteRun run = integrate_discrete(init, m, cfg.t_end, cfg.dt,
                                       cfg.sample_times, Scheme::Rk4);
  json states = json::array();
  std::vector<SeriesRow> rows;
  for (size_t k = 0; k < run.states.size(); ++k) {
    states.push_back(
        {{"t", run.times[k]}, {"state", state_to_json(run.states[k])}});
    rows.push_back({run.times[k], run.states[k].total_trace(),
                    mean_conditional_purity(run.states[k]), 0.0});
  }
  write_json_file(dir + "/states.json", states);
  if (cfg.csv) write_csv(dir + "/series.csv", rows);

  const auto& fin = run.states.back();
  json summary;
  summary["mode"] = cfg.mode;
  summary["model"] = rm.name;
  summary["trace_drift"] = run.max_trace_drift;
  json marg = json::array();
  const rvec p = classical_marginal(fin);
  for (int i = 0; i < p.size(); ++i) marg.push_back(p(i));
  summary["final_marginal"] = std::move(marg);
  summary["purity"] = mean_conditional_purity(fin);
  write_json_file(dir + "/summary.json", summary);
  return 0;
}

int run_hme_grid(const RunConfig& cfg, const ResolvedModel& rm,
                 const std::string& dir) {
  const DiffusiveModel& m = *rm.diffusive;
  if (!rm.grid) throw Error("grid required for hme-grid");
  const GridSpec& grid = *rm.grid;
  GridBoundModel bound = bind_model(m, grid);
  HybridStateGrid init = initial_grid_state(cfg, m, grid);
  GridRun run =
      integrate_grid(init, bound, cfg.t_end, cfg.dt, cfg.sample_times);
  json states = json::array();
  std::vector<SeriesRow> rows;
  for (size_t k = 0; k < run.states.size(); ++k) {
    states.push_back(
        {{"t", run.times[k]}, {"state", state_to_json(run.states[k])}});
    rows.push_back({run.times[k], run.states[k].total_trace(),
                    mean_conditional_purity(run.states[k]), 0.0});
  }
  write_json_file(dir + "/states.json", states);
  if (cfg.csv) write_csv(dir + "/series.csv", rows);

  const auto& fin = run.states.back();
  json summary;
  summary["mode"] = cfg.mode;
  summary["model"] = rm.name;
  summary["trace_drift"] = run.max_trace_drift;
  json marg = json::array();
  const rvec p = classical_marginal(fin);
  for (int i = 0; i < p.size(); ++i) marg.push_back(p(i));
  summary["final_marginal"] = std::move(marg);
  summary["purity"] = mean_conditional_purity(fin);
  write_json_file(dir + "/summary.json", summary);
  return 0;
}

int run_unravel_jump(const RunConfig& cfg, const ResolvedModel& rm,
                     const std::string& dir) {
  const DiscreteModel& m = *rm.discrete;
  const int M = cfg.n_trajectories;
  JumpOptions opt;
  opt.dt = cfg.dt;
  opt.t_end = cfg.t_end;
  opt.sample_times = cfg.sample_times;

  cvec psi0 = cvec::Zero(m.dim);
  psi0(0) = 1.0;

  std::vector<JumpTrajectory> trajs(M);
  parallel_for(M, [&](int i) {
    Philox rng(*cfg.master_seed, static_cast<std::uint64_t>(i));
    trajs[i] = simulate_jump_trajectory(0, psi0, m, opt, rng);
  });

  // trajectory records
  {
    std::ofstream out(dir + "/trajectories.jsonl");
    if (!out) throw IoError("cannot write trajectories.jsonl");
    for (int i = 0; i < M; ++i)
      for (const auto& s : trajs[i].samples) {
        json rec;
        rec["traj"] = i;
        rec["t"] = s.t;
        rec["x"] = s.point;
        rec["psi"] = psi_to_json(s.psi);
        rec["jumps_so_far"] = s.jumps_so_far;
        out << rec.dump() << "\n";
      }
  }

  // ensemble estimates per sample time
  const size_t K = trajs.empty() ? 0 : trajs[0].samples.size();
  json ensemble = json::array();
  std::vector<SeriesRow> rows;
  double final_max_se = 0.0;
  EnsembleDiscrete final_est;
  for (size_t k = 0; k < K; ++k) {
    std::vector<std::pair<int, cvec>> at_time;
    at_time.reserve(M);
    for (const auto& tr : trajs)
      at_time.emplace_back(tr.samples[k].point, tr.samples[k].psi);
    EnsembleDiscrete est = ensemble_estimate(at_time, m.num_points(), m.dim);
    double max_se = 0.0;
    for (int p = 0; p < m.num_points(); ++p)
      max_se = std::max({max_se, est.se_re[p].maxCoeff(),
                         est.se_im[p].maxCoeff()});
    ensemble.push_back({{"t", trajs[0].samples[k].t},
                        {"state", state_to_json(est.mean)},
                        {"max_se", max_se}});
    rows.push_back({trajs[0].samples[k].t, est.mean.total_trace(),
                    mean_conditional_purity(est.mean), max_se});
    if (k + 1 == K) {
      final_max_se = max_se;
      final_est = std::move(est);
    }
  }
  write_json_file(dir + "/ensemble.json", ensemble);
  if (cfg.csv) write_csv(dir + "/series.csv", rows);

  json summary;
  summary["mode"] = cfg.mode;
  summary["model"] = rm.name;
  summary["trajectories"] = M;
  summary["max_se"] = final_max_se;
  const rvec p = classical_marginal(final_est.mean);
  json marg = json::array();
  for (int i = 0; i < p.size(); ++i) marg.push_back(p(i));
  summary["final_marginal"] = std::move(marg);
  summary["purity"] = mean_conditional_purity(final_est.mean);

  if (cfg.compare_hme) {
    HybridStateDiscrete init = HybridStateDiscrete::zero(m.dim, m.num_points());
    init.blocks[0] = psi0 * psi0.adjoint();
    DiscreteRun ref = integrate_discrete(init, m, cfg.t_end, cfg.dt,
                                         cfg.sample_times, Scheme::Rk4);
    double max_dev = 0.0, max_dev_over_se = 0.0;
    const auto& exact = ref.states.back();
    for (int pt = 0; pt < m.num_points(); ++pt) {
      const cmat diff = final_est.mean.blocks[pt] - exact.blocks[pt];
      for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < m.dim; ++j) {
          const double dre = std::abs(diff(i, j).real());
          const double dim_ = std::abs(diff(i, j).imag());
          max_dev = std::max({max_dev, dre, dim_});
          const double se_re = std::max(final_est.se_re[pt](i, j), 1e-12);
          const double se_im = std::max(final_est.se_im[pt](i, j), 1e-12);
          max_dev_over_se =
              std::max({max_dev_over_se, dre / se_re, dim_ / se_im});
        }
    }
    summary["max_deviation_vs_hme"] = max_dev;
    summary["max_deviation_over_se"] = max_dev_over_se;
  }
  write_json_file(dir + "/summary.json", summary);
  return 0;
}

int run_unravel_diffusive(const RunConfig& cfg, const ResolvedModel& rm,
                          const std::string& dir, bool monitored) {
  const DiffusiveModel& m = *rm.diffusive;
  if (!rm.grid) throw Error("grid required for diffusive unravelings");
  const GridSpec& grid = *rm.grid;
  const int M = cfg.n_trajectories;

  const bool mixed =
      !monitored && cfg.noise.level == QuantumNoiseLevel::ReducedMin;
  DiffusiveOptions opt;
  opt.dt = cfg.dt;
  opt.t_end = cfg.t_end;
  opt.sample_times = cfg.sample_times;
  opt.spec = cfg.noise;
  opt.kind = monitored ? DiffusiveKind::Monitored
                       : (mixed ? DiffusiveKind::Mixed : DiffusiveKind::Pure);
  opt.record_noise = cfg.record_noise;

  std::vector<DiffusiveTrajectory> trajs(M);
  parallel_for(M, [&](int i) {
    Philox rng(*cfg.master_seed, static_cast<std::uint64_t>(i));
    TrajectoryState init = initial_trajectory(cfg, m, grid, rng, mixed);
    trajs[i] = simulate_diffusive_trajectory(init, m, opt, rng);
  });

  {
    std::ofstream out(dir + "/trajectories.jsonl");
    if (!out) throw IoError("cannot write trajectories.jsonl");
    for (int i = 0; i < M; ++i)
      for (const auto& s : trajs[i].samples) {
        json rec;
        rec["traj"] = i;
        rec["t"] = s.t;
        rec["x"] = s.x;
        if (s.psi.size()) rec["psi"] = psi_to_json(s.psi);
        if (s.sigma.size()) rec["sigma"] = matrix_to_json(s.sigma);
        out << rec.dump() << "\n";
      }
  }
  if (cfg.record_noise) {
    std::ofstream out(dir + "/noise.jsonl");
    if (!out) throw IoError("cannot write noise.jsonl");
    for (int i = 0; i < M; ++i)
      for (size_t k = 0; k < trajs[i].dW_path.size(); ++k) {
        json rec;
        rec["traj"] = i;
        rec["step"] = k;
        json dw = json::array();
        for (int n = 0; n < trajs[i].dW_path[k].size(); ++n)
          dw.push_back(trajs[i].dW_path[k](n));
        rec["dW"] = std::move(dw);
        out << rec.dump() << "\n";
      }
  }

  const size_t K = trajs.empty() ? 0 : trajs[0].samples.size();
  json ensemble = json::array();
  std::vector<SeriesRow> rows;
  double final_max_se = 0.0;
  double purity = 0.0;
  EnsembleGrid final_est;
  for (size_t k = 0; k < K; ++k) {
    std::vector<DiffusiveSample> at_time;
    at_time.reserve(M);
    for (const auto& tr : trajs) at_time.push_back(tr.samples[k]);
    EnsembleGrid est = ensemble_estimate_grid(at_time, grid, m.dim);
    double max_se = 0.0;
    for (int p = 0; p < grid.num_nodes(); ++p)
      max_se = std::max({max_se, est.se_re[p].maxCoeff(),
                         est.se_im[p].maxCoeff()});
    double mean_purity = 0.0;
    for (const auto& s : at_time) {
      if (s.sigma.size())
        mean_purity += (s.sigma * s.sigma).trace().real();
      else
        mean_purity += 1.0;
    }
    mean_purity /= static_cast<double>(M);
    ensemble.push_back({{"t", trajs[0].samples[k].t},
                        {"state", state_to_json(est.mean)},
                        {"max_se", max_se},
                        {"mean_purity", mean_purity}});
    rows.push_back({trajs[0].samples[k].t, est.mean.total_trace(), mean_purity,
                    max_se});
    if (k + 1 == K) {
      final_max_se = max_se;
      purity = mean_purity;
      final_est = std::move(est);
    }
  }
  write_json_file(dir + "/ensemble.json", ensemble);
  if (cfg.csv) write_csv(dir + "/series.csv", rows);

  json summary;
  summary["mode"] = cfg.mode;
  summary["model"] = rm.name;
  summary["trajectories"] = M;
  summary["max_se"] = final_max_se;
  summary["purity"] = purity;
  const rvec p = classical_marginal(final_est.mean);
  json marg = json::array();
  for (int i = 0; i < p.size(); ++i) marg.push_back(p(i));
  summary["final_marginal"] = std::move(marg);
  write_json_file(dir + "/summary.json", summary);
  return 0;
}

int run_impl(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const std::string dir = cfg.out_dir;
  write_manifest(cfg, dir);

  ResolvedModel rm = resolve_model(cfg);

  if (cfg.mode == "validate") return run_validate(cfg, rm, dir);

  // admissibility gate before any run
  if (rm.diffusive) {
    GridSpec grid = rm.grid ? *rm.grid
                            : GridSpec::uniform_1d(64, 0.0, 6.283185307179586);
    ValidationReport r = validate_model(*rm.diffusive, grid);
    write_json_file(dir + "/report.json", report_to_json(r));
    if (!r.psd_ok && !cfg.allow_inadmissible) return 2;
    if (cfg.mode == "unravel-monitored" && !r.monitoring_ok) {
      std::fprintf(stderr,
                   "hybridsim: the model does not satisfy the monitoring "
                   "condition\n");
      return 2;
    }
  } else {
    json rep;
    rep["generators_independent"] = generators_independent(*rm.discrete);
    write_json_file(dir + "/report.json", rep);
  }

  if (cfg.mode == "hme-discrete") {
    if (!rm.discrete) throw Error("hme-discrete needs a discrete model file");
    return run_hme_discrete(cfg, rm, dir);
  }
  if (cfg.mode == "hme-grid") {
    if (!rm.diffusive) throw Error("hme-grid needs a diffusive model");
    return run_hme_grid(cfg, rm, dir);
  }
  if (cfg.mode == "unravel-jump") {
    if (!rm.discrete) throw Error("unravel-jump needs a discrete model file");
    return run_unravel_jump(cfg, rm, dir);
  }
  if (cfg.mode == "unravel-diffusive") {
    if (!rm.diffusive) throw Error("unravel-diffusive needs a diffusive model");
    return run_unravel_diffusive(cfg, rm, dir, false);
  }
  if (cfg.mode == "unravel-monitored") {
    if (!rm.diffusive) throw Error("unravel-monitored needs a diffusive model");
    return run_unravel_diffusive(cfg, rm, dir, true);
  }
  throw Error("unhandled mode " + cfg.mode);
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    return run_impl(cfg);
  } catch (const IoError& e) {
    std::fprintf(stderr, "hybridsim: io error: %s\n", e.what());
    return 4;
  } catch (const InfeasibleNoiseChoice& e) {
    std::fprintf(stderr,
                 "hybridsim: infeasible noise choice: %s (minor det %.6g at "
                 "rows %d,%d)\n",
                 e.what(), e.minor_determinant, e.minor_row, e.minor_col);
    return 2;
  } catch (const MonitoringInfeasible& e) {
    std::fprintf(stderr, "hybridsim: %s\n", e.what());
    return 2;
  } catch (const InadmissibleModel& e) {
    std::fprintf(stderr, "hybridsim: %s\n", e.what());
    return 2;
  } catch (const NonFinite& e) {
    std::fprintf(stderr, "hybridsim: numerical failure: %s\n", e.what());
    return 3;
  } catch (const CflViolation& e) {
    std::fprintf(stderr, "hybridsim: numerical failure: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "hybridsim: %s\n", e.what());
    return 3;
  }
}

}  // namespace hybridsim
