#include "hybridsim/discrete_hme.hpp"

#include <algorithm>
#include <cmath>

#include "hybridsim/errors.hpp"
#include "hybridsim/kernels.hpp"

namespace hybridsim {

namespace {

void build_loss(const DiscreteModel& m, std::vector<cmat>& loss) {
  loss.assign(m.num_points(), cmat::Zero(m.dim, m.dim));
  for (const auto& ch : m.channels)
    for (const auto& e : ch.entries) loss[e.from] += e.op.adjoint() * e.op;
}

// y += a * x over all blocks
void axpy_state(cplx a, const HybridStateDiscrete& x, HybridStateDiscrete& y) {
  for (int i = 0; i < x.num_points(); ++i) {
    kernels::axpy(a, x.blocks[i].data(), y.blocks[i].data(),
                  static_cast<size_t>(x.dim) * x.dim);
  }
}

}  // namespace

void hme_rhs(const HybridStateDiscrete& state, const DiscreteModel& model,
             HybridStateDiscrete& out, HmeRhsWorkspace& ws) {
  const int P = model.num_points();
  const int d = model.dim;
  if (state.num_points() != P || state.dim != d)
    throw ShapeMismatch("hme_rhs: state and model disagree");
  if (!ws.loss_valid) {
    build_loss(model, ws.loss);
    ws.loss_valid = true;
  }
  if (out.num_points() != P || out.dim != d)
    out = HybridStateDiscrete::zero(d, P);

  for (int x = 0; x < P; ++x) {
    ws.t1.noalias() = model.H[x] * state.blocks[x];
    out.blocks[x] = -kI * (ws.t1 - ws.t1.adjoint());
    // loss, grouped Hermitian: -1/2 (M rho + rho M)
    ws.t2.noalias() = ws.loss[x] * state.blocks[x];
    out.blocks[x] -= 0.5 * (ws.t2 + ws.t2.adjoint());
  }
  // gain terms
  for (const auto& ch : model.channels)
    for (const auto& e : ch.entries) {
      ws.t1.noalias() = e.op * state.blocks[e.from];
      out.blocks[e.to].noalias() += ws.t1 * e.op.adjoint();
    }
}

HybridStateDiscrete hme_rhs(const HybridStateDiscrete& state,
                            const DiscreteModel& model) {
  HmeRhsWorkspace ws;
  HybridStateDiscrete out;
  hme_rhs(state, model, out, ws);
  return out;
}

DiscreteRun integrate_discrete(const HybridStateDiscrete& init,
                               const DiscreteModel& model, double t_end,
                               double dt,
                               const std::vector<double>& sample_times,
                               Scheme scheme) {
  if (dt <= 0.0) throw Error("integrate_discrete: dt must be positive");
  HmeRhsWorkspace ws;
  DiscreteRun run;
  HybridStateDiscrete y = init;
  HybridStateDiscrete k1, k2, k3, k4, stage;
  const double trace0 = init.total_trace();

  std::vector<double> samples = sample_times;
  std::sort(samples.begin(), samples.end());
  size_t next_sample = 0;
  const long nsteps = std::lround(t_end / dt);

  auto maybe_sample = [&](double t) {
    while (next_sample < samples.size() && samples[next_sample] <= t + dt / 2) {
      run.times.push_back(t);
      run.states.push_back(y);
      ++next_sample;
    }
    run.max_trace_drift =
        std::max(run.max_trace_drift, std::abs(y.total_trace() - trace0));
  };

  maybe_sample(0.0);
  for (long step = 0; step < nsteps; ++step) {
    if (scheme == Scheme::Euler) {
      hme_rhs(y, model, k1, ws);
      axpy_state(dt, k1, y);
    } else {
      hme_rhs(y, model, k1, ws);
      stage = y;
      axpy_state(0.5 * dt, k1, stage);
      hme_rhs(stage, model, k2, ws);
      stage = y;
      axpy_state(0.5 * dt, k2, stage);
      hme_rhs(stage, model, k3, ws);
      stage = y;
      axpy_state(dt, k3, stage);
      hme_rhs(stage, model, k4, ws);
      axpy_state(dt / 6.0, k1, y);
      axpy_state(dt / 3.0, k2, y);
      axpy_state(dt / 3.0, k3, y);
      axpy_state(dt / 6.0, k4, y);
    }
    for (const auto& b : y.blocks)
      if (!all_finite(b))
        throw NonFinite("integrate_discrete: state left the finite range");
    maybe_sample((step + 1) * dt);
  }
  return run;
}

}  // namespace hybridsim
