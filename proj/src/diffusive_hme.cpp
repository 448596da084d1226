#include "hybridsim/diffusive_hme.hpp"

#include <algorithm>
#include <cmath>

#include "hybridsim/errors.hpp"
#include "hybridsim/kernels.hpp"

namespace hybridsim {

GridBoundModel bind_model(const DiffusiveModel& m, const GridSpec& grid) {
  GridBoundModel b;
  b.dim = m.dim;
  b.nclassical = m.nclassical;
  b.nchannels = m.nchannels;
  b.grid = grid;
  if (grid.ndim() != m.nclassical)
    throw ShapeMismatch("bind_model: grid dimension != classical dimension");
  if (m.nclassical > 8)
    throw ShapeMismatch("bind_model: at most 8 classical dimensions");
  const int nn = grid.num_nodes();
  b.H.resize(nn);
  b.L.resize(nn);
  b.DQ.resize(nn);
  b.DC.resize(nn);
  b.G.resize(nn);
  b.V.resize(nn);
  b.loss.resize(nn);
  for (int i = 0; i < nn; ++i) {
    const XCoord x = grid.node_coords(i);
    b.H[i] = m.H(x);
    b.L[i].resize(m.nchannels);
    for (int a = 0; a < m.nchannels; ++a) b.L[i][a] = m.L(x, a);
    b.DQ[i] = m.DQ(x);
    b.DC[i] = m.DC(x);
    b.G[i] = m.G(x);
    b.V[i] = m.V(x);
    cmat loss = cmat::Zero(m.dim, m.dim);
    for (int be = 0; be < m.nchannels; ++be)
      for (int a = 0; a < m.nchannels; ++a)
        loss.noalias() +=
            b.DQ[i](be, a) * (b.L[i][be].adjoint() * b.L[i][a]);
    b.loss[i] = loss;
    Eigen::SelfAdjointEigenSolver<rmat> es(b.DC[i], Eigen::EigenvaluesOnly);
    b.max_DC_norm =
        std::max(b.max_DC_norm, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return b;
}

namespace {

void check_shapes(const HybridStateGrid& state, const GridBoundModel& m) {
  if (state.dim != m.dim || state.grid.dims != m.grid.dims)
    throw ShapeMismatch("grid state and model disagree");
  for (int n = 0; n < state.grid.ndim(); ++n) {
    if (state.grid.dims[n] < 3)
      throw BoundaryUnderflow("derivative stencils need at least 3 nodes");
  }
}

// out[i] += c * field[j]; j < 0 (outside a non-periodic grid) reads zero
inline void gather(std::vector<cplx>& out, int i,
                   const std::vector<cplx>& field, int j, int bs, cplx c) {
  if (j < 0) return;
  kernels::axpy(c, field.data() + static_cast<size_t>(j) * bs,
                out.data() + static_cast<size_t>(i) * bs, bs);
}

}  // namespace

void diffusive_rhs(const HybridStateGrid& state, const GridBoundModel& m,
                   HybridStateGrid& out, GridRhsWorkspace& ws) {
  check_shapes(state, m);
  const int nn = state.grid.num_nodes();
  const int d = state.dim;
  const int bs = d * d;
  const int N = m.nclassical;
  const int A = m.nchannels;

  if (out.grid.dims != state.grid.dims || out.dim != d)
    out = HybridStateGrid::zero(state.grid, d);
  else
    std::fill(out.data.begin(), out.data.end(), cplx(0, 0));

  // ---- local terms: commutator, decoherence -------------------------------
  std::vector<cmat> X(A);
  for (int i = 0; i < nn; ++i) {
    auto rho = state.block(i);
    auto drho = out.block(i);
    ws.t1.noalias() = m.H[i] * rho;
    drho = -kI * (ws.t1 - ws.t1.adjoint());
    ws.t1.noalias() = m.loss[i] * rho;
    drho -= 0.5 * (ws.t1 + ws.t1.adjoint());
    for (int a = 0; a < A; ++a) X[a].noalias() = m.L[i][a] * rho;
    for (int be = 0; be < A; ++be) {
      ws.t2.setZero(d, d);
      for (int a = 0; a < A; ++a) ws.t2 += m.DQ[i](be, a) * X[a];
      drho.noalias() += ws.t2 * m.L[i][be].adjoint();
    }
  }

  // ---- derivative terms ----------------------------------------------------
  const int npairs = N * (N + 1) / 2;
  const size_t field_len = static_cast<size_t>(nn) * bs;
  ws.fields.resize(npairs + N);
  for (auto& f : ws.fields) f.assign(field_len, cplx(0, 0));

  // W fields: DC[n][m](x) * rho(x); B fields: backaction + drift flux
  int pair_of[8][8];
  {
    int k = 0;
    for (int n = 0; n < N; ++n)
      for (int mm = n; mm < N; ++mm) pair_of[n][mm] = k++;
  }
  for (int i = 0; i < nn; ++i) {
    auto rho = state.block(i);
    for (int n = 0; n < N; ++n)
      for (int mm = n; mm < N; ++mm) {
        auto& f = ws.fields[pair_of[n][mm]];
        Eigen::Map<cmat>(f.data() + static_cast<size_t>(i) * bs, d, d) =
            m.DC[i](n, mm) * rho;
      }
    for (int n = 0; n < N; ++n) {
      ws.t3.setZero(d, d);
      for (int a = 0; a < A; ++a)
        ws.t3.noalias() += std::conj(m.G[i](n, a)) * (m.L[i][a] * rho);
      ws.t3 = ws.t3 + ws.t3.adjoint() - m.V[i](n) * rho;
      Eigen::Map<cmat>(ws.fields[npairs + n].data() +
                           static_cast<size_t>(i) * bs,
                       d, d) = ws.t3;
    }
  }

  for (int i = 0; i < nn; ++i) {
    for (int n = 0; n < N; ++n) {
      const double h_n = state.grid.spacing[n];
      const int up = state.grid.neighbor(i, n, +1);
      const int dn = state.grid.neighbor(i, n, -1);
      // 1/2 d_n d_n (DC[n][n] rho)
      {
        const auto& f = ws.fields[pair_of[n][n]];
        const cplx c(0.5 / (h_n * h_n), 0);
        gather(out.data, i, f, up, bs, c);
        gather(out.data, i, f, dn, bs, c);
        gather(out.data, i, f, i, bs, -2.0 * c);
      }
      // d_n (backaction + drift flux)
      {
        const auto& f = ws.fields[npairs + n];
        const cplx c(0.5 / h_n, 0);
        gather(out.data, i, f, up, bs, c);
        gather(out.data, i, f, dn, bs, -c);
      }
      // d_n d_m (DC[n][m] rho) for m > n; both index orders folded into one
      // four-point stencil
      for (int mm = n + 1; mm < N; ++mm) {
        const double h_m = state.grid.spacing[mm];
        const auto& f = ws.fields[pair_of[n][mm]];
        const cplx c(1.0 / (4.0 * h_n * h_m), 0);
        const int pp = state.grid.neighbor(up, mm, +1);
        const int pm = state.grid.neighbor(up, mm, -1);
        const int mp = state.grid.neighbor(dn, mm, +1);
        const int mmn = state.grid.neighbor(dn, mm, -1);
        gather(out.data, i, f, pp, bs, c);
        gather(out.data, i, f, mmn, bs, c);
        gather(out.data, i, f, pm, bs, -c);
        gather(out.data, i, f, mp, bs, -c);
      }
    }
  }
}

HybridStateGrid diffusive_rhs(const HybridStateGrid& state,
                              const GridBoundModel& m) {
  GridRhsWorkspace ws;
  HybridStateGrid out;
  diffusive_rhs(state, m, out, ws);
  return out;
}

std::vector<double> fokker_planck_rhs(const HybridStateGrid& state,
                                      const GridBoundModel& m,
                                      double tol_zero) {
  check_shapes(state, m);
  const int nn = state.grid.num_nodes();
  const int N = m.nclassical;
  std::vector<double> out(nn, 0.0);

  const int npairs = N * (N + 1) / 2;
  std::vector<std::vector<double>> fields(npairs + N,
                                          std::vector<double>(nn, 0.0));
  int pair_of[8][8];
  {
    int k = 0;
    for (int n = 0; n < N; ++n)
      for (int mm = n; mm < N; ++mm) pair_of[n][mm] = k++;
  }
  for (int i = 0; i < nn; ++i) {
    auto rho = state.block(i);
    const double p = rho.trace().real();
    for (int n = 0; n < N; ++n)
      for (int mm = n; mm < N; ++mm)
        fields[pair_of[n][mm]][i] = m.DC[i](n, mm) * p;
    for (int n = 0; n < N; ++n) {
      double flux = -m.V[i](n) * p;
      if (p > tol_zero) {
        cplx acc(0, 0);
        for (int a = 0; a < m.nchannels; ++a)
          acc += std::conj(m.G[i](n, a)) * (m.L[i][a] * rho).trace();
        flux += 2.0 * acc.real();
      }
      fields[npairs + n][i] = flux;
    }
  }

  auto at = [&](const std::vector<double>& f, int node) {
    return node < 0 ? 0.0 : f[node];
  };
  for (int i = 0; i < nn; ++i) {
    for (int n = 0; n < N; ++n) {
      const double h_n = state.grid.spacing[n];
      const int up = state.grid.neighbor(i, n, +1);
      const int dn = state.grid.neighbor(i, n, -1);
      const auto& w = fields[pair_of[n][n]];
      out[i] += 0.5 * (at(w, up) - 2.0 * w[i] + at(w, dn)) / (h_n * h_n);
      const auto& b = fields[npairs + n];
      out[i] += 0.5 * (at(b, up) - at(b, dn)) / h_n;
      for (int mm = n + 1; mm < N; ++mm) {
        const double h_m = state.grid.spacing[mm];
        const auto& f = fields[pair_of[n][mm]];
        const int pp = state.grid.neighbor(up, mm, +1);
        const int pm = state.grid.neighbor(up, mm, -1);
        const int mp = state.grid.neighbor(dn, mm, +1);
        const int mmn = state.grid.neighbor(dn, mm, -1);
        out[i] += (at(f, pp) + at(f, mmn) - at(f, pm) - at(f, mp)) /
                  (4.0 * h_n * h_m);
      }
    }
  }
  return out;
}

double cfl_dt_limit(const GridBoundModel& m, double safety) {
  double hmin2 = std::numeric_limits<double>::max();
  for (double h : m.grid.spacing) hmin2 = std::min(hmin2, h * h);
  if (m.max_DC_norm <= 0.0) return std::numeric_limits<double>::max();
  return safety * hmin2 / m.max_DC_norm;
}

GridRun integrate_grid(const HybridStateGrid& init, const GridBoundModel& m,
                       double t_end, double dt,
                       const std::vector<double>& sample_times,
                       double cfl_safety) {
  if (dt <= 0.0) throw Error("integrate_grid: dt must be positive");
  const double limit = cfl_dt_limit(m, cfl_safety);
  if (dt > limit)
    throw CflViolation("integrate_grid: dt exceeds the diffusion limit " +
                       std::to_string(limit));
  GridRhsWorkspace ws;
  GridRun run;
  HybridStateGrid y = init;
  HybridStateGrid k1, k2, k3, k4, stage;
  const double trace0 = init.total_trace();
  const size_t len = y.data.size();

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
    diffusive_rhs(y, m, k1, ws);
    stage = y;
    kernels::axpy(0.5 * dt, k1.data.data(), stage.data.data(), len);
    diffusive_rhs(stage, m, k2, ws);
    stage = y;
    kernels::axpy(0.5 * dt, k2.data.data(), stage.data.data(), len);
    diffusive_rhs(stage, m, k3, ws);
    stage = y;
    kernels::axpy(dt, k3.data.data(), stage.data.data(), len);
    diffusive_rhs(stage, m, k4, ws);
    kernels::axpy(dt / 6.0, k1.data.data(), y.data.data(), len);
    kernels::axpy(dt / 3.0, k2.data.data(), y.data.data(), len);
    kernels::axpy(dt / 3.0, k3.data.data(), y.data.data(), len);
    kernels::axpy(dt / 6.0, k4.data.data(), y.data.data(), len);
    for (const cplx& c : y.data)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw NonFinite("integrate_grid: state left the finite range");
    maybe_sample((step + 1) * dt);
  }
  return run;
}

// ---------------------------------------------------------------------------

EpsilonModel build_epsilon_model(const DiffusiveModel& m,
                                 const GridSpec& lattice, double tol) {
  if (lattice.ndim() != 1 || m.nclassical != 1)
    throw ShapeMismatch(
        "build_epsilon_model supports one classical dimension");
  if (!lattice.periodic[0])
    throw BoundaryUnderflow("build_epsilon_model needs a periodic lattice");
  const double eps = lattice.spacing[0];
  const int P = lattice.dims[0];
  const int A = m.nchannels;
  const int d = m.dim;

  // the construction assumes a backaction matrix constant over the lattice
  const cmat G0 = m.G(lattice.node_coords(0));
  for (int i = 1; i < P; ++i) {
    if ((m.G(lattice.node_coords(i)) - G0).cwiseAbs().maxCoeff() > 1e-12)
      throw UnsupportedXDependence(
          "build_epsilon_model: backaction must be x-independent");
  }

  EpsilonModel em;
  em.eps = eps;
  em.lattice = lattice;
  em.discrete.dim = d;
  em.discrete.H.resize(P);
  em.discrete.coords.resize(P);
  // A+1 correlated channels from the coefficient-matrix factorization, plus
  // one drift channel
  em.discrete.channels.resize(A + 2);

  const double wq = 1.0 / std::sqrt(2.0);        // quantum hop weight
  const double gc = 1.0 / (std::sqrt(2.0) * eps);  // classical hop weight

  for (int y = 0; y < P; ++y) {
    const XCoord xy = lattice.node_coords(y);
    em.discrete.H[y] = m.H(xy);
    em.discrete.coords[y] = xy;
    const cmat DQ = m.DQ(xy);
    const rmat DC = m.DC(xy);
    const double v = m.V(xy)(0);
    const double dc_eff = DC(0, 0) - eps * std::abs(v);
    if (dc_eff < -tol)
      throw InadmissibleModel(
          "build_epsilon_model: diffusion too small to carry the drift at "
          "this spacing");

    // joint coefficient matrix over (quantum channels, classical channel),
    // ordered so that the lattice master equation reproduces the diffusive
    // right-hand side exactly in the small-spacing limit
    cmat phi = cmat::Zero(A + 1, A + 1);
    for (int al = 0; al < A; ++al)
      for (int be = 0; be < A; ++be) phi(al, be) = DQ(be, al);
    for (int al = 0; al < A; ++al) {
      phi(al, A) = std::conj(G0(0, al));
      phi(A, al) = G0(0, al);
    }
    phi(A, A) = std::max(dc_eff, 0.0);

    Eigen::SelfAdjointEigenSolver<cmat> es(phi);
    const rvec lam = es.eigenvalues();
    const double lmax = std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
    if (lam.minCoeff() < -1e-9 * lmax)
      throw InadmissibleModel(
          "build_epsilon_model: inadmissible coefficient matrix");

    const int up = lattice.neighbor(y, 0, +1);
    const int dn = lattice.neighbor(y, 0, -1);
    std::vector<cmat> Ly(A);
    for (int a = 0; a < A; ++a) Ly[a] = m.L(xy, a);

    for (int k = 0; k <= A; ++k) {
      if (lam(k) <= tol * lmax) continue;
      const double s = std::sqrt(lam(k));
      cmat q = cmat::Zero(d, d);
      for (int a = 0; a < A; ++a) q += es.eigenvectors()(a, k) * Ly[a];
      q *= wq;
      const cplx cc = es.eigenvectors()(A, k) * gc;
      // up-hop carries -gc, down-hop +gc; the sign fixes the direction
      // convention of the first-derivative limit
      cmat op_up = s * (q - cc * cmat::Identity(d, d));
      cmat op_dn = s * (q + cc * cmat::Identity(d, d));
      em.discrete.channels[k].entries.push_back({up, y, std::move(op_up)});
      em.discrete.channels[k].entries.push_back({dn, y, std::move(op_dn)});
    }
    if (v != 0.0) {
      const double rate = std::abs(v) / eps;
      const int dest = v > 0.0 ? up : dn;
      em.discrete.channels[A + 1].entries.push_back(
          {dest, y, std::sqrt(rate) * cmat::Identity(d, d)});
    }
  }
  // drop empty channels
  auto& ch = em.discrete.channels;
  ch.erase(std::remove_if(ch.begin(), ch.end(),
                          [](const DiscreteChannel& c) {
                            return c.entries.empty();
                          }),
           ch.end());
  return em;
}

HybridStateDiscrete to_lattice_state(const HybridStateGrid& g) {
  HybridStateDiscrete s;
  s.dim = g.dim;
  s.blocks.resize(g.grid.num_nodes());
  const double cell = g.grid.cell_volume();
  for (int i = 0; i < g.grid.num_nodes(); ++i) s.blocks[i] = g.block(i) * cell;
  return s;
}

}  // namespace hybridsim
