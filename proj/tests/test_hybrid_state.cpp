#include "doctest.h"

#include <cmath>

#include "hybridsim/errors.hpp"
#include "hybridsim/hybrid_state.hpp"
#include "hybridsim/rng.hpp"
#include "hybridsim/serialize.hpp"

using namespace hybridsim;

namespace {

cmat random_density(int dim, std::uint64_t stream) {
  Philox rng(1234, stream);
  cmat A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      A(i, j) = cplx(rng.next_gaussian(), rng.next_gaussian());
  cmat rho = A * A.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("classical marginal of a two-point state") {
  HybridStateDiscrete s = HybridStateDiscrete::zero(2, 2);
  s.blocks[0] = 0.3 * 0.5 * pauli(0);
  s.blocks[1] = 0.7 * 0.5 * pauli(0);
  const rvec p = classical_marginal(s);
  CHECK(p(0) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(p(1) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(s.total_trace() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pure concentration gives an indicator marginal") {
  HybridStateDiscrete s = HybridStateDiscrete::zero(2, 3);
  cmat proj = cmat::Zero(2, 2);
  proj(0, 0) = 1.0;
  s.blocks[1] = proj;
  const rvec p = classical_marginal(s);
  CHECK(p(0) == 0.0);
  CHECK(p(1) == 1.0);
  CHECK(p(2) == 0.0);
}

TEST_CASE("circle-ansatz state has the uniform marginal it was built from") {
  // rho(x) = (1 + s(x).sigma)/2 * w(x) with s = (cos x, 0, sin x)
  const int nn = 32;
  GridSpec g = GridSpec::uniform_1d(nn, 0.0, 2 * M_PI);
  HybridStateGrid s = HybridStateGrid::zero(g, 2);
  const double w = 1.0 / (2 * M_PI);
  for (int i = 0; i < nn; ++i) {
    const double x = g.node_coords(i)[0];
    s.block(i) =
        0.5 * (pauli(0) + std::cos(x) * pauli(1) + std::sin(x) * pauli(3)) * w;
  }
  const rvec p = classical_marginal(s);
  for (int i = 0; i < nn; ++i) CHECK(p(i) == doctest::Approx(w).epsilon(1e-14));
  CHECK(s.total_trace() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("conditional state normalizes and rejects zero weight") {
  HybridStateDiscrete s = HybridStateDiscrete::zero(2, 2);
  cmat proj = cmat::Zero(2, 2);
  proj(1, 1) = 0.3;
  s.blocks[0] = proj;
  const cmat c = conditional_state(s, 0);
  CHECK(c(1, 1).real() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.trace().real() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS((void)conditional_state(s, 1), ZeroProbability);
}

TEST_CASE("conditional state of a unit Bloch block is a rank-1 projector") {
  // eigen-decomposition oracle for (1 + s.sigma)/2 with |s| = 1
  const double x = 0.83;
  cmat block =
      0.5 * (pauli(0) + std::cos(x) * pauli(1) + std::sin(x) * pauli(3)) * 0.4;
  HybridStateDiscrete s = HybridStateDiscrete::zero(2, 1);
  s.blocks[0] = block;
  const cmat c = conditional_state(s, 0);
  Eigen::SelfAdjointEigenSolver<cmat> es(c);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bloch decomposition on reference matrices") {
  {
    auto d = bloch_decompose(0.5 * pauli(0));
    CHECK(d.weight == doctest::Approx(1.0));
    CHECK(d.length() == doctest::Approx(0.0));
  }
  {
    cmat proj = cmat::Zero(2, 2);
    proj(0, 0) = 1.0;
    auto d = bloch_decompose(proj);
    CHECK(d.s[2] == doctest::Approx(1.0));
    CHECK(d.s[0] == doctest::Approx(0.0));
  }
  {
    // direct trace computation: 0.5 * (1 + 0.6 s1 + 0.8 s3) * 0.5
    cmat m = 0.5 * (pauli(0) + 0.6 * pauli(1) + 0.8 * pauli(3)) * 0.5;
    auto d = bloch_decompose(m);
    CHECK(d.weight == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d.s[0] == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(d.s[1] == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(d.s[2] == doctest::Approx(0.8).epsilon(1e-13));
    CHECK(d.length() == doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK_THROWS_AS((void)bloch_decompose(cmat::Zero(2, 2)), ZeroProbability);
}

TEST_CASE("bloch round trip reproduces the matrix") {
  for (int k = 0; k < 20; ++k) {
    const cmat rho = random_density(2, 100 + k);
    auto d = bloch_decompose(rho);
    const cmat back = bloch_assemble(d.weight, d.s);
    CHECK((back - rho).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("classical marginal is linear in the state") {
  HybridStateDiscrete a = HybridStateDiscrete::zero(2, 3);
  HybridStateDiscrete b = HybridStateDiscrete::zero(2, 3);
  for (int i = 0; i < 3; ++i) {
    a.blocks[i] = random_density(2, 200 + i) * (0.2 + 0.1 * i);
    b.blocks[i] = random_density(2, 300 + i) * (0.3 - 0.05 * i);
  }
  HybridStateDiscrete mix = HybridStateDiscrete::zero(2, 3);
  for (int i = 0; i < 3; ++i) mix.blocks[i] = 2.0 * a.blocks[i] - 0.5 * b.blocks[i];
  const rvec pm = classical_marginal(mix);
  const rvec pa = classical_marginal(a);
  const rvec pb = classical_marginal(b);
  for (int i = 0; i < 3; ++i)
    CHECK(pm(i) == doctest::Approx(2.0 * pa(i) - 0.5 * pb(i)).epsilon(1e-13));
}

TEST_CASE("concentrate produces a normalized blob") {
  GridSpec g = GridSpec::uniform_1d(64, 0.0, 2 * M_PI);
  HybridStateGrid s = HybridStateGrid::zero(g, 2);
  cmat rho_q = cmat::Zero(2, 2);
  rho_q(0, 0) = 1.0;
  concentrate(s, {3.1}, rho_q, 3 * g.spacing[0]);
  CHECK(s.total_trace() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(min_block_eigenvalue(s) >= -1e-15);
}

TEST_CASE("grid neighbor indexing wraps periodically") {
  GridSpec g;
  g.dims = {4, 3};
  g.origin = {0.0, 0.0};
  g.spacing = {1.0, 1.0};
  g.periodic = {true, false};
  std::vector<int> idx = {0, 0};
  const int flat = g.flat_index(idx);
  CHECK(g.neighbor(flat, 0, -1) == g.flat_index({3, 0}));
  CHECK(g.neighbor(flat, 1, -1) == -1);
  CHECK(g.neighbor(flat, 1, +1) == g.flat_index({0, 1}));
  std::vector<int> idx2(2);
  g.unflatten(g.flat_index({2, 1}), idx2);
  CHECK(idx2[0] == 2);
  CHECK(idx2[1] == 1);
}

TEST_CASE("state serialization round-trips bit-exactly") {
  Philox rng(55, 0);
  HybridStateDiscrete s = HybridStateDiscrete::zero(3, 2);
  for (auto& b : s.blocks)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        b(i, j) = cplx(rng.next_gaussian(), rng.next_gaussian());
  const json j = state_to_json(s);
  const std::string text = j.dump();
  HybridStateDiscrete back = discrete_state_from_json(json::parse(text));
  REQUIRE(back.num_points() == s.num_points());
  for (int p = 0; p < 2; ++p)
    for (int i = 0; i < 3; ++i)
      for (int jj = 0; jj < 3; ++jj) {
        CHECK(back.blocks[p](i, jj).real() == s.blocks[p](i, jj).real());
        CHECK(back.blocks[p](i, jj).imag() == s.blocks[p](i, jj).imag());
      }

  GridSpec g = GridSpec::uniform_1d(8, -1.0, 2.0);
  HybridStateGrid sg = HybridStateGrid::zero(g, 2);
  for (auto& z : sg.data) z = cplx(rng.next_gaussian(), rng.next_gaussian());
  HybridStateGrid backg =
      grid_state_from_json(json::parse(state_to_json(sg).dump()));
  REQUIRE(backg.data.size() == sg.data.size());
  for (size_t i = 0; i < sg.data.size(); ++i) CHECK(backg.data[i] == sg.data[i]);
  CHECK(backg.grid.spacing[0] == sg.grid.spacing[0]);
}
