#pragma once

#include <optional>
#include <vector>

#include "hybridsim/model_spec.hpp"
#include "hybridsim/rng.hpp"

namespace hybridsim {

// psi-dependent transition rates out of a classical point.
struct JumpRates {
  struct Entry {
    int channel = 0;
    int to = 0;
    double rate = 0.0;  // |L(to, x) psi|^2
  };
  std::vector<Entry> entries;
  double total = 0.0;
};

// Raw rates from the model's generators as given.
JumpRates jump_rates(const cvec& psi, int x, const DiscreteModel& m);

// Deterministic flow between jumps: d psi/dt = (-iH - iH_fr + T/2) psi,
// integrated with one RK4 step and renormalized.  With dynamic_centering the
// diagonal generators are shifted to zero expectation (and the Hamiltonian
// compensated), which makes the unraveling gauge-invariant.
cvec drift_step(const cvec& psi, int x, const DiscreteModel& m, double dt,
                bool dynamic_centering = true);

struct JumpOutcome {
  int channel = 0;
  int to = 0;
  cvec psi;
};

// Select a destination with probability rate/total and apply the
// corresponding generator, renormalized.
JumpOutcome sample_and_apply_jump(const cvec& psi, int x, const JumpRates& r,
                                  const DiscreteModel& m,
                                  bool dynamic_centering, Philox& rng);

struct JumpEvent {
  double t = 0.0;
  int channel = 0;
  int from = 0;
  int to = 0;
};

struct JumpSample {
  double t = 0.0;
  int point = 0;
  cvec psi;
  long jumps_so_far = 0;
};

struct JumpOptions {
  double dt = 1e-3;
  double t_end = 1.0;
  std::vector<double> sample_times;
  bool dynamic_centering = true;
  double rate_dt_warn = 0.1;
};

struct JumpTrajectory {
  std::vector<JumpSample> samples;
  std::vector<JumpEvent> events;
  double max_rate_dt = 0.0;
};

// First-order scheduling: per step jump with probability T(x) dt, otherwise
// drift; x is constant between jumps.
JumpTrajectory simulate_jump_trajectory(int x0, const cvec& psi0,
                                        const DiscreteModel& m,
                                        const JumpOptions& opt, Philox& rng,
                                        bool keep_events = false);

// Empirical mean of psi psi^dag delta(z, x) over trajectories, with
// elementwise standard errors of the real and imaginary parts.
struct EnsembleDiscrete {
  HybridStateDiscrete mean;
  std::vector<rmat> se_re;
  std::vector<rmat> se_im;
  int count = 0;
};

EnsembleDiscrete ensemble_estimate(
    const std::vector<std::pair<int, cvec>>& samples, int npoints, int dim);

// Static variant of the zero-expectation gauge: shifts every diagonal
// generator by -<L(x,x)> in the reference state.
DiscreteModel normalize_generators(const DiscreteModel& m, const cvec& psi_ref);

}  // namespace hybridsim
