#include "doctest.h"

#include <cmath>

#include "hybridsim/discrete_hme.hpp"
#include "hybridsim/diffusive_hme.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/model_spec.hpp"
#include "hybridsim/rng.hpp"

using namespace hybridsim;

namespace {

cmat scalar1(double v) {
  cmat m(1, 1);
  m(0, 0) = v;
  return m;
}

rmat rscalar1(double v) {
  rmat m(1, 1);
  m(0, 0) = v;
  return m;
}

cmat random_complex(int r, int c, Philox& rng) {
  cmat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      m(i, j) = cplx(rng.next_gaussian(), rng.next_gaussian());
  return m;
}

rmat random_real(int r, int c, Philox& rng) {
  rmat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.next_gaussian();
  return m;
}

// D = [R; S] [R; S]^dag with real S gives a PSD block matrix with a real
// diffusion corner: DQ = R R^dag, DC = S S^T, G = S R^dag.
struct RandomBlocks {
  cmat DQ;
  rmat DC;
  cmat G;
};

RandomBlocks random_psd_blocks(int A, int N, int k, Philox& rng) {
  RandomBlocks b;
  const cmat R = random_complex(A, k, rng);
  const rmat S = random_real(N, k, rng);
  b.DQ = R * R.adjoint();
  b.DC = S * S.transpose();
  b.G = S.cast<cplx>() * R.adjoint();
  return b;
}

}  // namespace

TEST_CASE("validate_block on the scalar reference cases") {
  {
    auto r = validate_block(scalar1(1), rscalar1(1), scalar1(1));
    CHECK(r.psd_ok);
    CHECK(r.min_eig == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.minimum_noise);
  }
  {
    auto r = validate_block(scalar1(1), rscalar1(1), scalar1(1.2));
    CHECK_FALSE(r.psd_ok);
    CHECK(r.min_eig < -0.1);
  }
  {
    Philox rng(7, 0);
    auto b = random_psd_blocks(2, 2, 3, rng);
    auto r = validate_block(b.DQ, b.DC, cmat::Zero(2, 2));
    CHECK(r.psd_ok);
  }
}

TEST_CASE("validate_block rejects malformed inputs") {
  CHECK_THROWS_AS(
      (void)validate_block(scalar1(1), rmat::Identity(2, 2), scalar1(1)),
      ShapeMismatch);
  cmat nh(2, 2);
  nh << 1, 2, 3, 4;  // not Hermitian
  CHECK_THROWS_AS(
      (void)validate_block(nh, rmat::Identity(2, 2), cmat::Zero(2, 2)),
      NonHermitianInput);
}

TEST_CASE("pseudo inverse on reference matrices") {
  {
    cmat m = cmat::Zero(2, 2);
    m(0, 0) = 2.0;
    const cmat p = pseudo_inverse(m);
    CHECK(p(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(p(1, 1)) == doctest::Approx(0.0));
  }
  {
    const cmat p = pseudo_inverse(cmat(cmat::Identity(3, 3)));
    CHECK((p - cmat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  }
  {
    // rank-1 [[1,1],[1,1]]: eigenvalue 2 on (1,1)/sqrt(2), inverse 1/2 on the
    // same direction, so entries are all 1/4
    cmat m(2, 2);
    m << 1, 1, 1, 1;
    const cmat p = pseudo_inverse(m);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(p(i, j).real() == doctest::Approx(0.25).epsilon(1e-13));
  }
  cmat nh(2, 2);
  nh << 1, 2, 0, 1;
  CHECK_THROWS_AS((void)pseudo_inverse(nh), NonHermitianInput);
}

TEST_CASE("pseudo inverse projects onto the range") {
  Philox rng(11, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const cmat R = random_complex(4, 2, rng);
    const cmat M = R * R.adjoint();  // rank <= 2
    const cmat P = pseudo_inverse(M) * M;
    CHECK((P * M - M).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("minimum-noise verdicts on scalar models") {
  {
    auto c = check_minimum_noise(scalar1(2), rscalar1(0.5), scalar1(1));
    CHECK(c.ok);
    CHECK(c.fitted_inverse_error < 1e-12);
    CHECK(c.saturation_diffusion < 1e-12);
    CHECK(c.saturation_decoherence < 1e-12);
  }
  {
    auto c = check_minimum_noise(scalar1(1), rscalar1(1), scalar1(1));
    CHECK(c.ok);
    CHECK(c.rank_block == 1);
  }
  {
    auto c = check_minimum_noise(scalar1(2), rscalar1(2), scalar1(1));
    CHECK_FALSE(c.ok);
    CHECK(c.rank_block == 2);
    CHECK(c.rank_G == 1);
  }
}

TEST_CASE("monitoring condition on scalar models") {
  CHECK(check_monitoring(scalar1(0.5), rscalar1(2), scalar1(1)).ok);
  CHECK(check_monitoring(scalar1(1), rscalar1(1), scalar1(1)).ok);
  CHECK_FALSE(check_monitoring(scalar1(1), rscalar1(4), scalar1(1)).ok);
}

TEST_CASE("three-way positivity verdicts agree") {
  Philox rng(21, 0);
  int seen_psd = 0, seen_violations = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int A = 1 + static_cast<int>(rng.next_double() * 3);
    const int N = 1 + static_cast<int>(rng.next_double() * 3);
    const int k = 1 + static_cast<int>(rng.next_double() * 4);
    RandomBlocks b = random_psd_blocks(A, N, k, rng);
    if (trial % 2 == 1) b.G *= 1.0 + 1.0 * rng.next_double();  // usually breaks it
    const auto r = validate_block(b.DQ, b.DC, b.G);
    const bool via_diffusion = r.excess_diffusion_violation <= 1e-8 &&
                               r.range_defect_quantum <= 1e-8;
    const bool via_decoherence = r.excess_decoherence_violation <= 1e-8 &&
                                 r.range_defect_classical <= 1e-8;
    CHECK(via_diffusion == r.psd_ok);
    CHECK(via_decoherence == r.psd_ok);
    if (r.psd_ok) {
      ++seen_psd;
      CHECK(r.rank_DQ >= numerical_rank_hermitian(
                              cmat(b.G.adjoint() * b.G), 1e-10));
      CHECK(r.rank_DC >=
            numerical_rank_hermitian(cmat(b.G * b.G.adjoint()), 1e-10));
    } else {
      ++seen_violations;
    }
  }
  CHECK(seen_psd > 5);
  CHECK(seen_violations > 5);
}

TEST_CASE("random threshold models satisfy the inverse trade-off") {
  Philox rng(31, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const int A = 1 + static_cast<int>(rng.next_double() * 3);
    const int N = 1 + static_cast<int>(rng.next_double() * 3);
    // real backaction and decoherence keep the minimum-noise diffusion real
    const rmat G = random_real(N, A, rng);
    const rmat W = random_real(N, N, rng);
    const rmat M = W * W.transpose() + 0.1 * rmat::Identity(N, N);
    const cmat Gc = G.cast<cplx>();
    const cmat DQ = Gc.adjoint() * M.cast<cplx>() * Gc;
    const rmat DC = (Gc * pseudo_inverse(DQ) * Gc.adjoint()).real();
    auto c = check_minimum_noise(DQ, DC, Gc);
    CHECK(c.ok);
    CHECK(c.fitted_inverse_error < 1e-8);
    auto r = validate_block(DQ, DC, Gc);
    CHECK(r.psd_ok);
    CHECK(r.minimum_noise);
  }
}

// ---------------------------------------------------------------------------

namespace {

DiscreteModel random_discrete_model(int P, int dim, int A, Philox& rng,
                                    bool zero_diagonal = false) {
  DiscreteModel m;
  m.dim = dim;
  m.H.resize(P);
  for (int x = 0; x < P; ++x) {
    const cmat h = random_complex(dim, dim, rng);
    m.H[x] = 0.5 * (h + h.adjoint());
  }
  m.channels.resize(A);
  for (int a = 0; a < A; ++a) {
    for (int x = 0; x < P; ++x)
      for (int y = 0; y < P; ++y) {
        if (zero_diagonal && x == y) continue;
        if (rng.next_double() < 0.5) continue;  // sparse support
        m.channels[a].entries.push_back(
            {x, y, 0.5 * random_complex(dim, dim, rng)});
      }
  }
  return m;
}

HybridStateDiscrete random_state(int P, int dim, Philox& rng) {
  HybridStateDiscrete s = HybridStateDiscrete::zero(dim, P);
  double tot = 0;
  for (auto& b : s.blocks) {
    const cmat A = random_complex(dim, dim, rng);
    b = A * A.adjoint();
    tot += b.trace().real();
  }
  for (auto& b : s.blocks) b /= tot;
  return s;
}

double rhs_difference(const DiscreteModel& a, const DiscreteModel& b,
                      const HybridStateDiscrete& s) {
  const HybridStateDiscrete ra = hme_rhs(s, a);
  const HybridStateDiscrete rb = hme_rhs(s, b);
  double d = 0;
  for (int p = 0; p < s.num_points(); ++p)
    d = std::max(d, (ra.blocks[p] - rb.blocks[p]).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

TEST_CASE("discrete gauge shift leaves the master equation invariant") {
  Philox rng(41, 0);
  for (int trial = 0; trial < 8; ++trial) {
    DiscreteModel m = random_discrete_model(3, 2, 2, rng);
    std::vector<std::vector<cplx>> ell(2, std::vector<cplx>(3));
    for (auto& row : ell)
      for (auto& l : row) l = cplx(rng.next_gaussian(), rng.next_gaussian());
    const DiscreteModel shifted = gauge_shift_discrete(m, ell);
    const HybridStateDiscrete s = random_state(3, 2, rng);
    CHECK(rhs_difference(m, shifted, s) < 1e-12);
  }
}

TEST_CASE("zero gauge shift is the identity") {
  Philox rng(43, 0);
  DiscreteModel m = random_discrete_model(2, 2, 1, rng);
  std::vector<std::vector<cplx>> ell(1, std::vector<cplx>(2, cplx(0, 0)));
  const DiscreteModel shifted = gauge_shift_discrete(m, ell);
  for (int x = 0; x < 2; ++x)
    CHECK((shifted.H[x] - m.H[x]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generator independence check") {
  Philox rng(47, 0);
  DiscreteModel m = random_discrete_model(3, 2, 2, rng);
  CHECK(generators_independent(m));

  // duplicating a channel kills independence
  DiscreteModel dup = m;
  dup.channels.push_back(m.channels[0]);
  CHECK_FALSE(generators_independent(dup));

  // a channel proportional to delta(x,y) * I is forbidden as well
  DiscreteModel withid = m;
  DiscreteChannel idch;
  for (int x = 0; x < 3; ++x)
    idch.entries.push_back({x, x, 0.7 * cmat::Identity(2, 2)});
  withid.channels.push_back(idch);
  CHECK_FALSE(generators_independent(withid));
}

TEST_CASE("diffusive gauge shift leaves the grid right-hand side invariant") {
  Philox rng(53, 0);
  const int A = 2, dim = 2;
  // smooth x-dependent fields on the circle
  DiffusiveModel m;
  m.dim = dim;
  m.nclassical = 1;
  m.nchannels = A;
  const cmat L0 = random_complex(dim, dim, rng);
  const cmat L1 = random_complex(dim, dim, rng);
  const cmat H0 = [&] {
    cmat h = random_complex(dim, dim, rng);
    return cmat(0.5 * (h + h.adjoint()));
  }();
  m.H = [H0](const XCoord& x) { return cmat(std::cos(x[0]) * H0); };
  m.L = [L0, L1](const XCoord& x, int a) {
    return cmat((a == 0 ? L0 : L1) * (1.0 + 0.3 * std::sin(x[0])));
  };
  m.DQ = [](const XCoord&) {
    cmat d(2, 2);
    d << 1.0, cplx(0.2, 0.1), cplx(0.2, -0.1), 0.8;
    return d;
  };
  m.DC = [](const XCoord&) { return rmat(0.7 * rmat::Identity(1, 1)); };
  m.G = [](const XCoord&) {
    cmat g(1, 2);
    g(0, 0) = cplx(0.3, 0.1);
    g(0, 1) = cplx(-0.2, 0.05);
    return g;
  };
  m.V = [](const XCoord& x) {
    rvec v(1);
    v(0) = 0.2 * std::cos(x[0]);
    return v;
  };

  auto ell = [](const XCoord& x) {
    cvec l(2);
    l(0) = cplx(0.4 * std::sin(x[0]), 0.2);
    l(1) = cplx(-0.3, 0.1 * std::cos(x[0]));
    return l;
  };
  const DiffusiveModel shifted = gauge_shift_diffusive(m, ell);

  GridSpec g = GridSpec::uniform_1d(32, 0.0, 2 * M_PI);
  GridBoundModel bm = bind_model(m, g);
  GridBoundModel bs = bind_model(shifted, g);
  HybridStateGrid state = HybridStateGrid::zero(g, dim);
  for (int i = 0; i < g.num_nodes(); ++i) {
    const cmat a = random_complex(dim, dim, rng);
    state.block(i) = a * a.adjoint();
  }
  const HybridStateGrid ra = diffusive_rhs(state, bm);
  const HybridStateGrid rb = diffusive_rhs(state, bs);
  double d = 0;
  for (size_t i = 0; i < ra.data.size(); ++i)
    d = std::max(d, std::abs(ra.data[i] - rb.data[i]));
  CHECK(d < 1e-12);
}

TEST_CASE("canonical backaction matrix") {
  // oscillator pair: h = (g q, g p) has grad g*I, so the symplectic gradient
  // couples q to the momentum operator and p to the position operator
  const double g = 2.0;
  const rmat G = canonical_backaction_matrix(rmat(g * rmat::Identity(2, 2)));
  CHECK(G(0, 0) == 0.0);
  CHECK(G(1, 1) == 0.0);
  CHECK(G(0, 1) == doctest::Approx(-g / 2));
  CHECK(G(1, 0) == doctest::Approx(+g / 2));

  // constant h: zero backaction
  const rmat Gz = canonical_backaction_matrix(rmat::Zero(2, 1));
  CHECK(Gz.cwiseAbs().maxCoeff() == 0.0);

  // h = q^2: gradient (2q, 0) gives G = (0, q)
  auto grad = [](const XCoord& x) {
    rmat gh(2, 1);
    gh << 2.0 * x[0], 0.0;
    return gh;
  };
  auto Gf = canonical_backaction(grad, 2);
  const cmat Gq = Gf({0.7, -0.3});
  CHECK(Gq(0, 0).real() == doctest::Approx(0.0));
  CHECK(Gq(1, 0).real() == doctest::Approx(0.7));

  CHECK_THROWS_AS((void)canonical_backaction_matrix(rmat::Zero(3, 1)),
                  OddDimension);
}

TEST_CASE("canonical backaction matches finite-difference gradients") {
  // analytic gradients vs central differences of h itself
  auto h = [](const XCoord& x) {
    rvec v(2);
    v << std::sin(x[0]) * x[1], x[0] * x[0] - 0.5 * x[1];
    return v;
  };
  auto grad = [](const XCoord& x) {
    rmat g(2, 2);
    g(0, 0) = std::cos(x[0]) * x[1];  // d h1 / dq
    g(0, 1) = 2.0 * x[0];             // d h2 / dq
    g(1, 0) = std::sin(x[0]);         // d h1 / dp
    g(1, 1) = -0.5;                   // d h2 / dp
    return g;
  };
  const XCoord x0 = {0.4, 1.3};
  const double eps = 1e-5;
  rmat fd(2, 2);
  for (int n = 0; n < 2; ++n) {
    XCoord xp = x0, xm = x0;
    xp[n] += eps;
    xm[n] -= eps;
    const rvec d = (h(xp) - h(xm)) / (2 * eps);
    for (int a = 0; a < 2; ++a) fd(n, a) = d(a);
  }
  const rmat Ga = canonical_backaction_matrix(grad(x0));
  const rmat Gf = canonical_backaction_matrix(fd);
  CHECK((Ga - Gf).cwiseAbs().maxCoeff() < 1e-8);
}
