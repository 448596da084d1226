#include "hybridsim/diffusive_unraveling.hpp"

#include <algorithm>
#include <cmath>

#include "hybridsim/errors.hpp"

namespace hybridsim {

namespace {

struct LocalFields {
  cmat H;
  std::vector<cmat> L;
  cmat DQ;
  rmat DC;
  cmat G;
  rvec V;
};

LocalFields eval_fields(const DiffusiveModel& m, const XCoord& x) {
  LocalFields f;
  f.H = m.H(x);
  f.L.resize(m.nchannels);
  for (int a = 0; a < m.nchannels; ++a) f.L[a] = m.L(x, a);
  f.DQ = m.DQ(x);
  f.DC = m.DC(x);
  f.G = m.G(x);
  f.V = m.V(x);
  return f;
}

cmat noise_target(const LocalFields& f, const NoiseSpec& spec) {
  if (spec.level == QuantumNoiseLevel::Full) return f.DQ;
  const rmat DCp = pseudo_inverse(f.DC, 1e-10);
  return cmat(spec.eta * (f.G.adjoint() * DCp.cast<cplx>() * f.G));
}

cvec pure_means(const std::vector<cmat>& L, const cvec& psi) {
  cvec mean(L.size());
  const double n2 = psi.squaredNorm();
  for (size_t a = 0; a < L.size(); ++a)
    mean(a) = (psi.adjoint() * L[a] * psi)(0) / n2;
  return mean;
}

cvec mixed_means(const std::vector<cmat>& L, const cmat& sigma) {
  cvec mean(L.size());
  for (size_t a = 0; a < L.size(); ++a) mean(a) = (L[a] * sigma).trace();
  return mean;
}

rvec classical_drift(const LocalFields& f, const cvec& Lmean) {
  rvec drift = f.V;
  for (int n = 0; n < drift.size(); ++n) {
    cplx acc(0, 0);
    for (int a = 0; a < Lmean.size(); ++a)
      acc += std::conj(f.G(n, a)) * Lmean(a);
    drift(n) -= 2.0 * acc.real();
  }
  return drift;
}

}  // namespace

NoiseCovariance build_noise_covariance(const cmat& DQ_target, const rmat& DC,
                                       const cmat& G, const NoiseSpec& spec,
                                       double tol) {
  const int A = static_cast<int>(DQ_target.rows());
  const int N = static_cast<int>(DC.rows());
  if (DQ_target.cols() != A || DC.cols() != N || G.rows() != N ||
      G.cols() != A)
    throw ShapeMismatch("build_noise_covariance: inconsistent shapes");
  if (!is_hermitian(DQ_target, 1e-8))
    throw NonHermitianInput("noise target must be Hermitian");

  NoiseCovariance cov;
  cov.A = A;
  cov.N = N;

  cmat C;
  switch (spec.choice) {
    case XiXiChoice::Zero:
      C = cmat::Zero(A, A);
      break;
    case XiXiChoice::Custom:
      C = spec.custom_C;
      if (C.rows() != A || C.cols() != A)
        throw ShapeMismatch("custom dxi.dxi matrix has the wrong shape");
      if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw Error("custom dxi.dxi matrix must be complex symmetric");
      break;
    case XiXiChoice::Monitored: {
      const rmat DCp = pseudo_inverse(DC, 1e-10);
      cov.F = G.adjoint() * DCp.cast<cplx>();
      const double scale = std::max(1.0, DQ_target.cwiseAbs().maxCoeff());
      if ((cov.F * DC.cast<cplx>() * cov.F.adjoint() - DQ_target)
              .cwiseAbs()
              .maxCoeff() > 1e-8 * scale)
        throw MonitoringInfeasible(
            "monitored noise requires DQ = G^dag DC^+ G");
      C = cov.F * DC.cast<cplx>() * cov.F.transpose();
      cov.monitored = true;
      Eigen::SelfAdjointEigenSolver<rmat> es(DC);
      cov.W_factor = es.eigenvectors() *
                     es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
      break;
    }
  }

  const rmat Saa = 0.5 * (DQ_target + C).real();
  const rmat Sbb = 0.5 * (DQ_target - C).real();
  const rmat Sab = 0.5 * (C.imag() - DQ_target.imag());
  const rmat Wa = G.real();  // E[dW da^T], N x A
  const rmat Wb = G.imag();

  rmat& S = cov.sigma;
  S = rmat::Zero(2 * A + N, 2 * A + N);
  S.block(0, 0, A, A) = Saa;
  S.block(A, A, A, A) = Sbb;
  S.block(0, A, A, A) = Sab;
  S.block(A, 0, A, A) = Sab.transpose();
  S.block(2 * A, 0, N, A) = Wa;
  S.block(0, 2 * A, A, N) = Wa.transpose();
  S.block(2 * A, A, N, A) = Wb;
  S.block(A, 2 * A, A, N) = Wb.transpose();
  S.block(2 * A, 2 * A, N, N) = DC;
  S = 0.5 * (S + S.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<rmat> es(S);
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -tol * scale) {
    // witness: the most negative 2x2 principal minor
    int wi = 0, wj = 1;
    double wdet = std::numeric_limits<double>::max();
    for (int i = 0; i < S.rows(); ++i)
      for (int j = i + 1; j < S.cols(); ++j) {
        const double det = S(i, i) * S(j, j) - S(i, j) * S(j, i);
        if (det < wdet) {
          wdet = det;
          wi = i;
          wj = j;
        }
      }
    throw InfeasibleNoiseChoice(
        "requested dxi.dxi correlation is incompatible with (DQ, DC, G)",
        min_eig, wi, wj, wdet);
  }
  cov.factor = es.eigenvectors() *
               es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return cov;
}

NoiseIncrement sample_increments(const NoiseCovariance& cov, double dt,
                                 Philox& rng) {
  NoiseIncrement inc;
  const double s = std::sqrt(dt);
  if (cov.monitored) {
    rvec g(cov.N);
    for (int i = 0; i < cov.N; ++i) g(i) = rng.next_gaussian();
    inc.dW = s * (cov.W_factor * g);
    inc.dxi = cov.F * inc.dW.cast<cplx>();
    return inc;
  }
  rvec g(2 * cov.A + cov.N);
  for (int i = 0; i < g.size(); ++i) g(i) = rng.next_gaussian();
  const rvec z = s * (cov.factor * g);
  inc.dxi.resize(cov.A);
  for (int a = 0; a < cov.A; ++a) inc.dxi(a) = cplx(z(a), z(cov.A + a));
  inc.dW = z.tail(cov.N);
  return inc;
}

cmat frictional_generator(const std::vector<cmat>& L, const cvec& Lmean,
                          const cmat& DQ) {
  const int d = L.empty() ? 0 : static_cast<int>(L[0].rows());
  const int A = static_cast<int>(L.size());
  cmat out = cmat::Zero(d, d);
  cmat T = cmat::Zero(d, d);
  for (int be = 0; be < A; ++be) {
    cmat Abe = L[be] - Lmean(be) * cmat::Identity(d, d);
    for (int a = 0; a < A; ++a) {
      cmat Aa = L[a] - Lmean(a) * cmat::Identity(d, d);
      out.noalias() -= 0.5 * DQ(be, a) * (Abe.adjoint() * Aa);
      T.noalias() += DQ(be, a) * std::conj(Lmean(be)) * L[a];
    }
  }
  out -= 0.5 * (T - T.adjoint());
  return out;  // this is -i H_fr
}

cmat frictional_h_diffusive(const TrajectoryState& traj,
                            const DiffusiveModel& m) {
  LocalFields f = eval_fields(m, traj.x);
  const cvec mean = traj.pure() ? pure_means(f.L, traj.psi)
                                : mixed_means(f.L, traj.sigma);
  return frictional_generator(f.L, mean, f.DQ);
}

TrajectoryState step_pure(const TrajectoryState& traj, const DiffusiveModel& m,
                          const NoiseSpec& spec, double dt, Philox& rng,
                          const NoiseCovariance* fixed_cov,
                          NoiseIncrement* used) {
  LocalFields f = eval_fields(m, traj.x);
  NoiseCovariance local;
  const NoiseCovariance* cov = fixed_cov;
  if (!cov) {
    local = build_noise_covariance(noise_target(f, spec), f.DC, f.G, spec);
    cov = &local;
  }
  const NoiseIncrement inc = sample_increments(*cov, dt, rng);
  if (used) *used = inc;

  const cvec mean = pure_means(f.L, traj.psi);
  const rvec drift = classical_drift(f, mean);

  TrajectoryState out = traj;
  for (int n = 0; n < f.V.size(); ++n)
    out.x[n] = traj.x[n] + drift(n) * dt - inc.dW(n);

  const cmat K = frictional_generator(f.L, mean, f.DQ);
  cvec dpsi = (-kI * (f.H * traj.psi) + K * traj.psi) * dt;
  for (int a = 0; a < m.nchannels; ++a) {
    dpsi += std::conj(inc.dxi(a)) *
            (f.L[a] * traj.psi - mean(a) * traj.psi);
  }
  out.psi = traj.psi + dpsi;
  if (!all_finite(out.psi)) throw NonFinite("step_pure: non-finite state");
  out.psi /= out.psi.norm();
  out.t = traj.t + dt;
  return out;
}

TrajectoryState step_mixed(const TrajectoryState& traj,
                           const DiffusiveModel& m, const NoiseSpec& spec,
                           double dt, Philox& rng,
                           const NoiseCovariance* fixed_cov,
                           NoiseIncrement* used) {
  LocalFields f = eval_fields(m, traj.x);
  NoiseCovariance local;
  const NoiseCovariance* cov = fixed_cov;
  if (!cov) {
    local = build_noise_covariance(noise_target(f, spec), f.DC, f.G, spec);
    cov = &local;
  }
  const NoiseIncrement inc = sample_increments(*cov, dt, rng);
  if (used) *used = inc;

  const int d = m.dim;
  const int A = m.nchannels;
  const cvec mean = mixed_means(f.L, traj.sigma);
  const rvec drift = classical_drift(f, mean);

  TrajectoryState out = traj;
  for (int n = 0; n < f.V.size(); ++n)
    out.x[n] = traj.x[n] + drift(n) * dt - inc.dW(n);

  cmat t1 = f.H * traj.sigma;
  cmat dsigma = -kI * (t1 - t1.adjoint());
  cmat M = cmat::Zero(d, d);
  for (int be = 0; be < A; ++be)
    for (int a = 0; a < A; ++a) {
      dsigma.noalias() +=
          f.DQ(be, a) * (f.L[a] * traj.sigma * f.L[be].adjoint());
      M.noalias() += f.DQ(be, a) * (f.L[be].adjoint() * f.L[a]);
    }
  t1.noalias() = M * traj.sigma;
  dsigma -= 0.5 * (t1 + t1.adjoint());
  dsigma *= dt;
  for (int a = 0; a < A; ++a) {
    cmat As = (f.L[a] - mean(a) * cmat::Identity(d, d)) * traj.sigma;
    cmat noise = std::conj(inc.dxi(a)) * As;
    dsigma += noise + noise.adjoint();
  }
  cmat sigma = traj.sigma + dsigma;
  if (!all_finite(sigma)) throw NonFinite("step_mixed: non-finite state");
  sigma = hermitize(sigma);
  sigma /= sigma.trace().real();
  out.sigma = std::move(sigma);
  out.t = traj.t + dt;
  return out;
}

double purity_rate(const cmat& sigma, const cmat& DQ,
                   const std::vector<cmat>& L) {
  const int d = static_cast<int>(sigma.rows());
  const int A = static_cast<int>(L.size());
  const cmat root = sqrt_psd(sigma);
  std::vector<cmat> B(A);
  for (int a = 0; a < A; ++a) {
    const cplx mean = (L[a] * sigma).trace();
    B[a] = root * (L[a] - mean * cmat::Identity(d, d)) * root;
  }
  cplx rate(0, 0);
  for (int be = 0; be < A; ++be)
    for (int a = 0; a < A; ++a)
      rate += 2.0 * DQ(be, a) * (B[be].adjoint() * B[a]).trace();
  return rate.real();
}

cvec monitored_xi(const rvec& dW, const cmat& G, const rmat& DC, double tol) {
  // only the range condition matters here; DQ consistency is the caller's
  const rmat DCp = pseudo_inverse(DC, 1e-10);
  const cmat F = G.adjoint() * DCp.cast<cplx>();
  const double range_defect =
      ((F * DC.cast<cplx>()) - G.adjoint()).cwiseAbs().maxCoeff();
  if (range_defect > tol * std::max(1.0, G.cwiseAbs().maxCoeff()))
    throw MonitoringInfeasible(
        "monitored_xi: backaction outside the diffusion range");
  return F * dW.cast<cplx>();
}

TrajectoryState step_monitored(const TrajectoryState& traj,
                               const DiffusiveModel& m, double dt, Philox& rng,
                               const NoiseCovariance* fixed_cov,
                               NoiseIncrement* used) {
  LocalFields f = eval_fields(m, traj.x);
  NoiseCovariance local;
  const NoiseCovariance* cov = fixed_cov;
  if (!cov) {
    NoiseSpec spec;
    spec.choice = XiXiChoice::Monitored;
    local = build_noise_covariance(f.DQ, f.DC, f.G, spec);
    cov = &local;
  }

  rvec g(cov->N);
  for (int i = 0; i < cov->N; ++i) g(i) = rng.next_gaussian();
  const rvec dW_raw = std::sqrt(dt) * (cov->W_factor * g);

  const cvec mean = pure_means(f.L, traj.psi);
  const rvec drift = classical_drift(f, mean);

  TrajectoryState out = traj;
  rvec dW_eff(cov->N);
  for (int n = 0; n < cov->N; ++n) {
    const double tmp = drift(n) * dt;
    out.x[n] = traj.x[n] + (tmp - dW_raw(n));
    // recover the increment exactly as a replay from the stored x would,
    // and drive psi with that value: replay becomes bit-identical
    const double dx = out.x[n] - traj.x[n];
    dW_eff(n) = tmp - dx;
  }
  const cvec dxi = cov->F * dW_eff.cast<cplx>();
  if (used) {
    used->dW = dW_eff;
    used->dxi = dxi;
  }

  const cmat K = frictional_generator(f.L, mean, f.DQ);
  cvec dpsi = (-kI * (f.H * traj.psi) + K * traj.psi) * dt;
  for (int a = 0; a < m.nchannels; ++a)
    dpsi += std::conj(dxi(a)) * (f.L[a] * traj.psi - mean(a) * traj.psi);
  out.psi = traj.psi + dpsi;
  if (!all_finite(out.psi)) throw NonFinite("step_monitored: non-finite state");
  out.psi /= out.psi.norm();
  out.t = traj.t + dt;
  return out;
}

std::vector<cvec> replay_monitored(const std::vector<std::vector<double>>& xs,
                                   const cvec& psi0, const DiffusiveModel& m,
                                   double dt) {
  std::vector<cvec> psis;
  psis.reserve(xs.size());
  cvec psi = psi0;
  psis.push_back(psi);
  for (size_t k = 0; k + 1 < xs.size(); ++k) {
    LocalFields f = eval_fields(m, xs[k]);
    NoiseSpec spec;
    spec.choice = XiXiChoice::Monitored;
    NoiseCovariance cov = build_noise_covariance(f.DQ, f.DC, f.G, spec);

    const cvec mean = pure_means(f.L, psi);
    const rvec drift = classical_drift(f, mean);
    rvec dW_eff(cov.N);
    for (int n = 0; n < cov.N; ++n) {
      const double tmp = drift(n) * dt;
      const double dx = xs[k + 1][n] - xs[k][n];
      dW_eff(n) = tmp - dx;
    }
    const cvec dxi = cov.F * dW_eff.cast<cplx>();
    const cmat K = frictional_generator(f.L, mean, f.DQ);
    cvec dpsi = (-kI * (f.H * psi) + K * psi) * dt;
    for (int a = 0; a < m.nchannels; ++a)
      dpsi += std::conj(dxi(a)) * (f.L[a] * psi - mean(a) * psi);
    psi = psi + dpsi;
    psi /= psi.norm();
    psis.push_back(psi);
  }
  return psis;
}

DiffusiveTrajectory simulate_diffusive_trajectory(const TrajectoryState& init,
                                                  const DiffusiveModel& m,
                                                  const DiffusiveOptions& opt,
                                                  Philox& rng) {
  DiffusiveTrajectory out;
  TrajectoryState s = init;
  s.t = 0.0;

  std::optional<NoiseCovariance> fixed;
  if (m.constant_coefficients) {
    LocalFields f = eval_fields(m, s.x);
    NoiseSpec spec = opt.spec;
    if (opt.kind == DiffusiveKind::Monitored)
      spec.choice = XiXiChoice::Monitored;
    fixed = build_noise_covariance(
        opt.kind == DiffusiveKind::Monitored ? f.DQ : noise_target(f, spec),
        f.DC, f.G, spec);
  }
  const NoiseCovariance* cov = fixed ? &*fixed : nullptr;

  std::vector<double> samples = opt.sample_times;
  std::sort(samples.begin(), samples.end());
  size_t next_sample = 0;
  const long nsteps = std::lround(opt.t_end / opt.dt);

  auto maybe_sample = [&](double t) {
    while (next_sample < samples.size() &&
           samples[next_sample] <= t + opt.dt / 2) {
      out.samples.push_back({t, s.x, s.psi, s.sigma});
      ++next_sample;
    }
  };
  auto record = [&](const TrajectoryState& st) {
    if (opt.record_path) out.x_path.push_back(st.x);
  };

  record(s);
  maybe_sample(0.0);
  NoiseIncrement inc;
  NoiseIncrement* incp = opt.record_noise ? &inc : nullptr;
  for (long step = 0; step < nsteps; ++step) {
    switch (opt.kind) {
      case DiffusiveKind::Pure:
        s = step_pure(s, m, opt.spec, opt.dt, rng, cov, incp);
        break;
      case DiffusiveKind::Mixed:
        s = step_mixed(s, m, opt.spec, opt.dt, rng, cov, incp);
        break;
      case DiffusiveKind::Monitored:
        s = step_monitored(s, m, opt.dt, rng, cov, incp);
        break;
    }
    if (incp) out.dW_path.push_back(inc.dW);
    record(s);
    maybe_sample((step + 1) * opt.dt);
  }
  return out;
}

EnsembleGrid ensemble_estimate_grid(const std::vector<DiffusiveSample>& at_time,
                                    const GridSpec& grid, int dim) {
  EnsembleGrid e;
  e.count = static_cast<int>(at_time.size());
  e.mean = HybridStateGrid::zero(grid, dim);
  const int nn = grid.num_nodes();
  std::vector<rmat> sum_re(nn, rmat::Zero(dim, dim));
  std::vector<rmat> sum_im(nn, rmat::Zero(dim, dim));
  std::vector<rmat> ssq_re(nn, rmat::Zero(dim, dim));
  std::vector<rmat> ssq_im(nn, rmat::Zero(dim, dim));

  const double cell = grid.cell_volume();
  std::vector<int> idx(grid.ndim());
  for (const auto& s : at_time) {
    for (int n = 0; n < grid.ndim(); ++n) {
      int i = static_cast<int>(
          std::lround((s.x[n] - grid.origin[n]) / grid.spacing[n]));
      if (grid.periodic[n]) {
        i %= grid.dims[n];
        if (i < 0) i += grid.dims[n];
      } else {
        i = std::clamp(i, 0, grid.dims[n] - 1);
      }
      idx[n] = i;
    }
    const int node = grid.flat_index(idx);
    const cmat P = (s.psi.size() ? cmat(s.psi * s.psi.adjoint()) : s.sigma) /
                   cell;
    sum_re[node] += P.real();
    sum_im[node] += P.imag();
    ssq_re[node] += P.real().cwiseAbs2();
    ssq_im[node] += P.imag().cwiseAbs2();
  }
  const double M = static_cast<double>(e.count);
  e.se_re.assign(nn, rmat::Zero(dim, dim));
  e.se_im.assign(nn, rmat::Zero(dim, dim));
  for (int p = 0; p < nn; ++p) {
    const rmat mean_re = sum_re[p] / M;
    const rmat mean_im = sum_im[p] / M;
    e.mean.block(p) = mean_re.cast<cplx>() + kI * mean_im.cast<cplx>();
    const rmat var_re = (ssq_re[p] / M - mean_re.cwiseAbs2()).cwiseMax(0.0);
    const rmat var_im = (ssq_im[p] / M - mean_im.cwiseAbs2()).cwiseMax(0.0);
    e.se_re[p] = (var_re / M).cwiseSqrt();
    e.se_im[p] = (var_im / M).cwiseSqrt();
  }
  return e;
}

}  // namespace hybridsim
