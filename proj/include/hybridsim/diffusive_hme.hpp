#pragma once

#include <vector>

#include "hybridsim/hybrid_state.hpp"
#include "hybridsim/model_spec.hpp"

namespace hybridsim {

// Diffusive-model fields evaluated once per grid node, plus the
// state-independent loss operator of the decoherence term.
struct GridBoundModel {
  int dim = 0;
  int nclassical = 0;
  int nchannels = 0;
  GridSpec grid;
  std::vector<cmat> H;
  std::vector<std::vector<cmat>> L;  // [node][channel]
  std::vector<cmat> DQ;
  std::vector<rmat> DC;
  std::vector<cmat> G;
  std::vector<rvec> V;
  std::vector<cmat> loss;  // sum_{ab} DQ[b][a] L_b^dag L_a per node
  double max_DC_norm = 0.0;
};

GridBoundModel bind_model(const DiffusiveModel& m, const GridSpec& grid);

struct GridRhsWorkspace {
  std::vector<std::vector<cplx>> fields;
  cmat t1, t2, t3;
};

// Right-hand side of the diffusive master equation: per-node commutator and
// decoherence, plus second-order central differences for the diffusion,
// backaction and drift terms.  Periodic axes wrap; non-periodic axes treat
// outside nodes as zero (absorbing).
void diffusive_rhs(const HybridStateGrid& state, const GridBoundModel& m,
                   HybridStateGrid& out, GridRhsWorkspace& ws);
HybridStateGrid diffusive_rhs(const HybridStateGrid& state,
                              const GridBoundModel& m);

// Classical marginal flow; equals the trace of diffusive_rhs except at
// nodes with vanishing probability, where the conditional expectation is
// taken as zero.
std::vector<double> fokker_planck_rhs(const HybridStateGrid& state,
                                      const GridBoundModel& m,
                                      double tol_zero = 1e-12);

double cfl_dt_limit(const GridBoundModel& m, double safety = 0.25);

struct GridRun {
  std::vector<double> times;
  std::vector<HybridStateGrid> states;
  double max_trace_drift = 0.0;
};

GridRun integrate_grid(const HybridStateGrid& init, const GridBoundModel& m,
                       double t_end, double dt,
                       const std::vector<double>& sample_times,
                       double cfl_safety = 0.25);

// Finite-spacing discrete model whose master equation converges to the
// diffusive one on smooth states as the lattice spacing shrinks.  Quantum
// generators ride symmetric +-eps hops, classical generators antisymmetric
// ones, correlated through the joint coefficient matrix; drift is carried by
// one-sided hop rates with the induced extra diffusion subtracted.
struct EpsilonModel {
  double eps = 0.0;
  GridSpec lattice;
  DiscreteModel discrete;
};

// Only 1-D periodic lattices are supported; the backaction matrix must not
// depend on x.
EpsilonModel build_epsilon_model(const DiffusiveModel& m,
                                 const GridSpec& lattice,
                                 double tol = 1e-12);

// Embed grid-sampled data as a state of the lattice model (same layout).
HybridStateDiscrete to_lattice_state(const HybridStateGrid& g);

}  // namespace hybridsim
