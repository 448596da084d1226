#pragma once

#include <vector>

#include "hybridsim/hybrid_state.hpp"
#include "hybridsim/model_spec.hpp"

namespace hybridsim {

// Scratch space reused across right-hand-side evaluations.
struct HmeRhsWorkspace {
  cmat t1, t2;
  std::vector<cmat> loss;  // per-point sum of L^dag L over outgoing entries
  bool loss_valid = false;
};

// d rho(x)/dt = -i[H(x), rho(x)]
//   + sum_{y,a} ( L_a(x,y) rho(y) L_a(x,y)^dag
//                 - Herm L_a(y,x)^dag L_a(y,x) rho(x) )
void hme_rhs(const HybridStateDiscrete& state, const DiscreteModel& model,
             HybridStateDiscrete& out, HmeRhsWorkspace& ws);

HybridStateDiscrete hme_rhs(const HybridStateDiscrete& state,
                            const DiscreteModel& model);

enum class Scheme { Rk4, Euler };

struct DiscreteRun {
  std::vector<double> times;
  std::vector<HybridStateDiscrete> states;
  double max_trace_drift = 0.0;
};

// Fixed-step integration; states reported at the requested sample times
// (rounded to step boundaries).  Trace is not renormalized: drift is a
// diagnostic.
DiscreteRun integrate_discrete(const HybridStateDiscrete& init,
                               const DiscreteModel& model, double t_end,
                               double dt,
                               const std::vector<double>& sample_times,
                               Scheme scheme = Scheme::Rk4);

}  // namespace hybridsim
