#include "hybridsim/jump_unraveling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hybridsim/errors.hpp"

namespace hybridsim {

namespace {

cplx expectation(const cmat& op, const cvec& psi) {
  const double n2 = psi.squaredNorm();
  return (psi.adjoint() * op * psi)(0) / n2;
}

// Effective generator for one entry: diagonal blocks get the current-state
// centering when requested.
cmat effective_op(const DiscreteGeneratorEntry& e, const cvec& psi,
                  bool center) {
  if (center && e.to == e.from) {
    const cplx mean = expectation(e.op, psi);
    return e.op - mean * cmat::Identity(e.op.rows(), e.op.cols());
  }
  return e.op;
}

JumpRates rates_with_mode(const cvec& psi, int x, const DiscreteModel& m,
                          bool center) {
  JumpRates r;
  for (int a = 0; a < m.num_channels(); ++a) {
    for (const auto& e : m.channels[a].entries) {
      if (e.from != x) continue;
      const cmat op = effective_op(e, psi, center);
      const double rate = (op * psi).squaredNorm() / psi.squaredNorm();
      r.entries.push_back({a, e.to, rate});
      r.total += rate;
    }
  }
  return r;
}

// Right-hand side of the frictional flow at fixed x.
cvec drift_rhs(const cvec& psi, int x, const DiscreteModel& m, bool center) {
  const int d = m.dim;
  cmat Heff = m.H[x];
  cmat R = cmat::Zero(d, d);
  for (int a = 0; a < m.num_channels(); ++a) {
    for (const auto& e : m.channels[a].entries) {
      if (e.from != x) continue;
      const cmat op = effective_op(e, psi, center);
      R.noalias() += op.adjoint() * op;
      if (center && e.to == x) {
        // Hamiltonian compensation of the centering shift ell = -<L>
        const cplx mean = expectation(e.op, psi);
        cmat X = std::conj(mean) * e.op;
        Heff += 0.5 * kI * (X - X.adjoint());
      }
    }
  }
  const double T = (psi.adjoint() * R * psi)(0).real() / psi.squaredNorm();
  return -kI * (Heff * psi) - 0.5 * (R * psi) + 0.5 * T * psi;
}

}  // namespace

JumpRates jump_rates(const cvec& psi, int x, const DiscreteModel& m) {
  return rates_with_mode(psi, x, m, false);
}

cvec drift_step(const cvec& psi, int x, const DiscreteModel& m, double dt,
                bool dynamic_centering) {
  const cvec k1 = drift_rhs(psi, x, m, dynamic_centering);
  const cvec k2 = drift_rhs(psi + 0.5 * dt * k1, x, m, dynamic_centering);
  const cvec k3 = drift_rhs(psi + 0.5 * dt * k2, x, m, dynamic_centering);
  const cvec k4 = drift_rhs(psi + dt * k3, x, m, dynamic_centering);
  cvec out = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!all_finite(out)) throw NonFinite("drift_step produced a non-finite state");
  out /= out.norm();
  return out;
}

JumpOutcome sample_and_apply_jump(const cvec& psi, int x, const JumpRates& r,
                                  const DiscreteModel& m,
                                  bool dynamic_centering, Philox& rng) {
  if (r.total <= 0.0)
    throw ZeroTotalRate("sample_and_apply_jump with zero total rate");
  const double pick = rng.next_double() * r.total;
  double acc = 0.0;
  size_t sel = r.entries.size() - 1;
  for (size_t i = 0; i < r.entries.size(); ++i) {
    acc += r.entries[i].rate;
    if (pick < acc) {
      sel = i;
      break;
    }
  }
  const auto& chosen = r.entries[sel];
  // locate the matching model entry to apply its (possibly centered) operator
  for (const auto& e : m.channels[chosen.channel].entries) {
    if (e.from != x || e.to != chosen.to) continue;
    const cmat op = effective_op(e, psi, dynamic_centering);
    cvec out = op * psi;
    const double n = out.norm();
    if (n <= 0.0) throw ZeroTotalRate("jump through a vanishing generator");
    out /= n;
    return {chosen.channel, chosen.to, std::move(out)};
  }
  throw Error("sample_and_apply_jump: rate entry without model entry");
}

JumpTrajectory simulate_jump_trajectory(int x0, const cvec& psi0,
                                        const DiscreteModel& m,
                                        const JumpOptions& opt, Philox& rng,
                                        bool keep_events) {
  JumpTrajectory out;
  cvec psi = psi0 / psi0.norm();
  int x = x0;
  long jumps = 0;
  bool warned = false;

  std::vector<double> samples = opt.sample_times;
  std::sort(samples.begin(), samples.end());
  size_t next_sample = 0;
  const long nsteps = std::lround(opt.t_end / opt.dt);

  auto maybe_sample = [&](double t) {
    while (next_sample < samples.size() &&
           samples[next_sample] <= t + opt.dt / 2) {
      out.samples.push_back({t, x, psi, jumps});
      ++next_sample;
    }
  };

  maybe_sample(0.0);
  for (long step = 0; step < nsteps; ++step) {
    const double t = step * opt.dt;
    const JumpRates r = rates_with_mode(psi, x, m, opt.dynamic_centering);
    out.max_rate_dt = std::max(out.max_rate_dt, r.total * opt.dt);
    if (r.total * opt.dt > opt.rate_dt_warn && !warned) {
      std::fprintf(stderr,
                   "hybridsim: warning: T*dt = %.3g exceeds %.2g; "
                   "reduce dt for an unbiased jump schedule\n",
                   r.total * opt.dt, opt.rate_dt_warn);
      warned = true;
    }
    const double u = rng.next_double();
    if (u < r.total * opt.dt) {
      JumpOutcome j =
          sample_and_apply_jump(psi, x, r, m, opt.dynamic_centering, rng);
      if (keep_events) out.events.push_back({t, j.channel, x, j.to});
      x = j.to;
      psi = std::move(j.psi);
      ++jumps;
    } else {
      psi = drift_step(psi, x, m, opt.dt, opt.dynamic_centering);
    }
    maybe_sample((step + 1) * opt.dt);
  }
  return out;
}

EnsembleDiscrete ensemble_estimate(
    const std::vector<std::pair<int, cvec>>& samples, int npoints, int dim) {
  EnsembleDiscrete e;
  e.count = static_cast<int>(samples.size());
  e.mean = HybridStateDiscrete::zero(dim, npoints);
  std::vector<rmat> sum_re(npoints, rmat::Zero(dim, dim));
  std::vector<rmat> sum_im(npoints, rmat::Zero(dim, dim));
  std::vector<rmat> ssq_re(npoints, rmat::Zero(dim, dim));
  std::vector<rmat> ssq_im(npoints, rmat::Zero(dim, dim));

  for (const auto& [x, psi] : samples) {
    const cmat P = psi * psi.adjoint();
    sum_re[x] += P.real();
    sum_im[x] += P.imag();
    ssq_re[x] += P.real().cwiseAbs2();
    ssq_im[x] += P.imag().cwiseAbs2();
    // points other than x contribute exact zeros to every accumulator
  }
  const double M = static_cast<double>(e.count);
  e.se_re.assign(npoints, rmat::Zero(dim, dim));
  e.se_im.assign(npoints, rmat::Zero(dim, dim));
  for (int p = 0; p < npoints; ++p) {
    const rmat mean_re = sum_re[p] / M;
    const rmat mean_im = sum_im[p] / M;
    e.mean.blocks[p] = mean_re.cast<cplx>() + kI * mean_im.cast<cplx>();
    const rmat var_re = (ssq_re[p] / M - mean_re.cwiseAbs2()).cwiseMax(0.0);
    const rmat var_im = (ssq_im[p] / M - mean_im.cwiseAbs2()).cwiseMax(0.0);
    e.se_re[p] = (var_re / M).cwiseSqrt();
    e.se_im[p] = (var_im / M).cwiseSqrt();
  }
  return e;
}

DiscreteModel normalize_generators(const DiscreteModel& m,
                                   const cvec& psi_ref) {
  std::vector<std::vector<cplx>> ell(
      m.num_channels(), std::vector<cplx>(m.num_points(), cplx(0, 0)));
  for (int a = 0; a < m.num_channels(); ++a)
    for (int x = 0; x < m.num_points(); ++x) {
      const cmat d = m.diagonal_op(a, x);
      if (d.cwiseAbs().maxCoeff() > 0)
        ell[a][x] = -expectation(d, psi_ref);
    }
  return gauge_shift_discrete(m, ell);
}

}  // namespace hybridsim
