#pragma once

#include <string>

#include "hybridsim/model_spec.hpp"

namespace hybridsim {

// Two-level system dephasing in sigma3 coupled to one classical coordinate
// on the circle [0, 2pi): DQ = DC = 1, real backaction G, no Hamiltonian.
// Admissible iff G^2 <= 1; builders report but do not enforce, so violation
// experiments stay possible.
DiffusiveModel build_two_level(double G);

// ds^2/dt of the unit Bloch-circle ansatz s(x) = (cos x, 0, sin x):
//   -4 cos^2 x - 4 G cos x - 1, maximized over x this equals G^2 - 1 for
// |G| <= 2.
double bloch_rate_on_circle(double G, double x);

// Truncated ladder operators with [Q, P] = i I away from the top level.
struct OscillatorOps {
  cmat Q, P;
};
OscillatorOps truncate_oscillator(int n_max);

enum class CanonicalNoiseMode { MinimumNoise, Explicit };

// Canonical hybrid model: H = HQ + Hcl(x) + h^a(x) L_a with Hermitian L_a,
// drift from the Poisson flow of Hcl, backaction from the symplectic
// gradient of h.
struct CanonicalSpecification {
  cmat HQ;
  std::function<double(const XCoord&)> H_cl;
  std::function<rvec(const XCoord&)> grad_H_cl;
  std::function<rvec(const XCoord&)> h;
  std::function<rmat(const XCoord&)> grad_h;  // N x A
  std::vector<cmat> L;
  cmat DQ;
  CanonicalNoiseMode mode = CanonicalNoiseMode::MinimumNoise;
  rmat DC_explicit;
};

// In MinimumNoise mode DC = G DQ^+ G^dag; throws RankDeficiency when that
// matrix does not reach the minimum-noise threshold for the given DQ.
DiffusiveModel build_canonical(const CanonicalSpecification& spec);

// Two identical oscillators, one quantized (Fock-truncated) and one
// classical: HQ = (Q^2+P^2)/2, Hcl = (q^2+p^2)/2, coupling g(q Q + p P),
// minimum-noise diffusion for the given DQ.
DiffusiveModel build_oscillator_pair(double g, const cmat& DQ, int n_max = 20);

// Preset addresses: "two-level:G=<v>" and "oscillator:g=<v>,dq=<v>[,nmax=<n>]".
struct Preset {
  DiffusiveModel model;
  std::string name;
};
Preset parse_preset(const std::string& text);

}  // namespace hybridsim
