#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hybridsim/hybrid_state.hpp"
#include "hybridsim/types.hpp"

namespace hybridsim {

// ---------------------------------------------------------------------------
// Discrete models
// ---------------------------------------------------------------------------

struct DiscreteGeneratorEntry {
  int to = 0;    // destination classical point x
  int from = 0;  // source classical point y
  cmat op;       // L(to, from)
};

struct DiscreteChannel {
  std::vector<DiscreteGeneratorEntry> entries;
  // classical coordinate a vectorized channel moves; -1 when unstructured
  int component = -1;
};

struct DiscreteModel {
  int dim = 0;
  std::vector<cmat> H;                      // one Hermitian matrix per point
  std::vector<DiscreteChannel> channels;
  std::vector<std::vector<double>> coords;  // optional per-point coordinates

  int num_points() const { return static_cast<int>(H.size()); }
  int num_channels() const { return static_cast<int>(channels.size()); }
  // diagonal block L_a(x,x), zero matrix when absent
  cmat diagonal_op(int channel, int point) const;
};

// Gram-matrix check that the generator family plus delta(x,y)*I is linearly
// independent.
bool generators_independent(const DiscreteModel& m, double tol = 1e-10);

// Shift generators by ell_a(x) on the diagonal and absorb the compensating
// Hamiltonian term; leaves the master-equation right-hand side invariant.
DiscreteModel gauge_shift_discrete(
    const DiscreteModel& m, const std::vector<std::vector<cplx>>& ell);

// ---------------------------------------------------------------------------
// Diffusive models
// ---------------------------------------------------------------------------

using XCoord = std::vector<double>;

// Fields over the classical space.  Callables keep presets exact; file-backed
// models bind per-node tables into the same interface.
struct DiffusiveModel {
  int dim = 0;         // Hilbert dimension
  int nclassical = 0;  // classical dimension N
  int nchannels = 0;   // number of generators A
  // noise matrices (DQ, DC, G) independent of x
  bool constant_coefficients = false;

  std::function<cmat(const XCoord&)> H;
  std::function<cmat(const XCoord&, int)> L;  // generator alpha at x
  std::function<cmat(const XCoord&)> DQ;      // A x A Hermitian PSD
  std::function<rmat(const XCoord&)> DC;      // N x N symmetric PSD
  std::function<cmat(const XCoord&)> G;       // N x A backaction
  std::function<rvec(const XCoord&)> V;       // drift

  // record of applied gauge shifts (diagnostic)
  std::vector<std::function<cvec(const XCoord&)>> shift_record;
};

DiffusiveModel gauge_shift_diffusive(
    const DiffusiveModel& m, std::function<cvec(const XCoord&)> ell);

// Backaction matrix of a canonical hybrid coupling h^a(x) L_a under the
// symplectic convention eps = [[0, I], [-I, 0]]:
//   G[n][a] = -1/2 sum_m eps[n][m] grad_h[m][a]
// Throws OddDimension unless N is even.
rmat canonical_backaction_matrix(const rmat& grad_h);
std::function<cmat(const XCoord&)> canonical_backaction(
    std::function<rmat(const XCoord&)> grad_h, int nclassical);

// ---------------------------------------------------------------------------
// Admissibility checks
// ---------------------------------------------------------------------------

// Hermitian block matrix [[DQ, G^dagger], [G, DC]]; its positive
// semi-definiteness is the complete-positivity condition.
struct NoiseBlockMatrix {
  cmat matrix;
  double min_eig = 0.0;
  bool psd_ok = false;
};

NoiseBlockMatrix assemble_noise_block(const cmat& DQ, const rmat& DC,
                                      const cmat& G, double tol_psd = 1e-9);

struct ValidationReport {
  bool psd_ok = false;
  double min_eig = 0.0;
  int rank_block = 0;
  int rank_G = 0;
  int rank_DQ = 0;
  int rank_DC = 0;
  double tol_rank = 0.0;
  bool minimum_noise = false;
  bool monitoring_ok = false;
  // max(0, lambda_max(G DQ^+ G^dag - DC)): diffusion below the backaction need
  double excess_diffusion_violation = 0.0;
  // || G DQ^+ DQ G^dag - G G^dag ||_F: backaction outside the decoherence range
  double range_defect_quantum = 0.0;
  // max(0, lambda_max(G^dag DC^+ G - DQ))
  double excess_decoherence_violation = 0.0;
  // || G^dag DC^+ DC G - G^dag G ||_F
  double range_defect_classical = 0.0;
};

ValidationReport validate_block(const cmat& DQ, const rmat& DC, const cmat& G,
                                double tol_rank = 1e-10,
                                double tol_psd = 1e-9);

// Every node of the lattice must pass; returns the worst-case report.
ValidationReport validate_model(const DiffusiveModel& m, const GridSpec& grid,
                                double tol_rank = 1e-10,
                                double tol_psd = 1e-9);

// Moore-Penrose inverse of a Hermitian PSD matrix via eigen-decomposition;
// eigenvalues below tol_rank * max are treated as zero.
cmat pseudo_inverse(const cmat& M, double tol_rank = 1e-10);
rmat pseudo_inverse(const rmat& M, double tol_rank = 1e-10);

struct MinimumNoiseCheck {
  bool ok = false;  // rank(block matrix) == rank(G)
  int rank_block = 0;
  int rank_G = 0;
  // || DC~ * DQ~ - I ||_inf over the active corner in the backaction-fitted
  // frame (SVD of G)
  double fitted_inverse_error = 0.0;
  double saturation_diffusion = 0.0;    // || G DQ^+ G^dag - DC ||_F
  double saturation_decoherence = 0.0;  // || G^dag DC^+ G - DQ ||_F
};

MinimumNoiseCheck check_minimum_noise(const cmat& DQ, const rmat& DC,
                                      const cmat& G, double tol_rank = 1e-10,
                                      double tol = 1e-8);

struct MonitoringCheck {
  bool ok = false;
  double defect = 0.0;        // || DQ - G^dag DC^+ G ||_F
  double range_defect = 0.0;  // || G^dag DC^+ DC - G^dag ||_F
};

MonitoringCheck check_monitoring(const cmat& DQ, const rmat& DC, const cmat& G,
                                 double tol = 1e-8);

int numerical_rank_hermitian(const cmat& M, double tol_rank);

}  // namespace hybridsim
