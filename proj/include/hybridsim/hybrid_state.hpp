#pragma once

#include <array>
#include <vector>

#include "hybridsim/types.hpp"

namespace hybridsim {

// Hybrid density over a finite set of classical points: one unnormalized
// quantum density matrix per point.  The trace of block x is the classical
// probability of x; the normalized block is the conditional quantum state.
struct HybridStateDiscrete {
  int dim = 0;
  std::vector<cmat> blocks;

  int num_points() const { return static_cast<int>(blocks.size()); }
  double total_trace() const;

  static HybridStateDiscrete zero(int dim, int npoints);
};

// Regular N-dimensional lattice.  Node i along axis n sits at
// origin[n] + i*spacing[n]; periodic axes wrap.
struct GridSpec {
  std::vector<int> dims;
  std::vector<double> origin;
  std::vector<double> spacing;
  std::vector<bool> periodic;

  int ndim() const { return static_cast<int>(dims.size()); }
  int num_nodes() const;
  double cell_volume() const;

  std::vector<double> node_coords(int flat) const;
  int flat_index(const std::vector<int>& idx) const;
  void unflatten(int flat, std::vector<int>& idx) const;
  // Flat index of the node shifted by `offset` along `axis`; -1 when the
  // shift leaves a non-periodic grid.
  int neighbor(int flat, int axis, int offset) const;

  static GridSpec uniform_1d(int nodes, double origin, double extent,
                             bool periodic = true);
};

// Hybrid density on a grid; blocks are densities in x (units 1/volume),
// stored node-major as row-major dim x dim complex blocks.
struct HybridStateGrid {
  GridSpec grid;
  int dim = 0;
  std::vector<cplx> data;

  static HybridStateGrid zero(const GridSpec& g, int dim);

  int block_size() const { return dim * dim; }
  Eigen::Map<cmat> block(int node);
  Eigen::Map<const cmat> block(int node) const;

  // quadrature of tr rho(x) over the grid
  double total_trace() const;
};

// One unraveling sample: classical location plus a pure or mixed quantum
// state.  Exactly one of psi/sigma is populated.
struct TrajectoryState {
  std::vector<double> x;  // continuous coordinates (diffusive unravelings)
  int point = -1;         // discrete label (jump unraveling)
  cvec psi;
  cmat sigma;
  double t = 0.0;

  bool pure() const { return psi.size() > 0; }
};

// tr of each block; sums (discrete) or integrates (grid) to one for a
// normalized state.
rvec classical_marginal(const HybridStateDiscrete& s);
rvec classical_marginal(const HybridStateGrid& s);

// rho(x)/tr rho(x); throws ZeroProbability when the point carries no weight.
cmat conditional_state(const HybridStateDiscrete& s, int point,
                       double tol_zero = 1e-12);
cmat conditional_state_grid(const HybridStateGrid& s, int node,
                            double tol_zero = 1e-12);

struct BlochDecomposition {
  double weight = 0.0;
  std::array<double, 3> s{};
  double length() const;
};

// rho = (weight/2) (I + s.sigma); requires dim 2 Hermitian input.
BlochDecomposition bloch_decompose(const cmat& rho2, double tol_zero = 1e-12);
cmat bloch_assemble(double weight, const std::array<double, 3>& s);

// Replace the grid state with a normalized Gaussian blob of the given width
// centred at x0, tensored with the supplied quantum state.
void concentrate(HybridStateGrid& state, const std::vector<double>& x0,
                 const cmat& rho_q, double width);

// Largest Hermiticity defect / most negative block eigenvalue, for
// diagnostics and tests.
double max_hermiticity_defect(const HybridStateDiscrete& s);
double max_hermiticity_defect(const HybridStateGrid& s);
double min_block_eigenvalue(const HybridStateDiscrete& s);
double min_block_eigenvalue(const HybridStateGrid& s);

}  // namespace hybridsim
