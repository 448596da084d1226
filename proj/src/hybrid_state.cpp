#include "hybridsim/hybrid_state.hpp"

#include <cmath>

#include "hybridsim/errors.hpp"

namespace hybridsim {

double HybridStateDiscrete::total_trace() const {
  double t = 0.0;
  for (const auto& b : blocks) t += b.trace().real();
  return t;
}

HybridStateDiscrete HybridStateDiscrete::zero(int dim, int npoints) {
  HybridStateDiscrete s;
  s.dim = dim;
  s.blocks.assign(npoints, cmat::Zero(dim, dim));
  return s;
}

int GridSpec::num_nodes() const {
  int n = 1;
  for (int d : dims) n *= d;
  return n;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (double h : spacing) v *= h;
  return v;
}

std::vector<double> GridSpec::node_coords(int flat) const {
  std::vector<int> idx(dims.size());
  unflatten(flat, idx);
  std::vector<double> x(dims.size());
  for (size_t n = 0; n < dims.size(); ++n)
    x[n] = origin[n] + idx[n] * spacing[n];
  return x;
}

int GridSpec::flat_index(const std::vector<int>& idx) const {
  int f = 0;
  for (size_t n = 0; n < dims.size(); ++n) f = f * dims[n] + idx[n];
  return f;
}

void GridSpec::unflatten(int flat, std::vector<int>& idx) const {
  for (int n = static_cast<int>(dims.size()) - 1; n >= 0; --n) {
    idx[n] = flat % dims[n];
    flat /= dims[n];
  }
}

int GridSpec::neighbor(int flat, int axis, int offset) const {
  if (flat < 0) return -1;
  std::vector<int> idx(dims.size());
  unflatten(flat, idx);
  int i = idx[axis] + offset;
  if (periodic[axis]) {
    i %= dims[axis];
    if (i < 0) i += dims[axis];
  } else if (i < 0 || i >= dims[axis]) {
    return -1;
  }
  idx[axis] = i;
  return flat_index(idx);
}

GridSpec GridSpec::uniform_1d(int nodes, double origin, double extent,
                              bool periodic) {
  GridSpec g;
  g.dims = {nodes};
  g.origin = {origin};
  // periodic grids omit the duplicate endpoint
  g.spacing = {periodic ? extent / nodes : extent / (nodes - 1)};
  g.periodic = {periodic};
  return g;
}

HybridStateGrid HybridStateGrid::zero(const GridSpec& g, int dim) {
  HybridStateGrid s;
  s.grid = g;
  s.dim = dim;
  s.data.assign(static_cast<size_t>(g.num_nodes()) * dim * dim, cplx(0, 0));
  return s;
}

Eigen::Map<cmat> HybridStateGrid::block(int node) {
  return Eigen::Map<cmat>(data.data() + static_cast<size_t>(node) * dim * dim,
                          dim, dim);
}

Eigen::Map<const cmat> HybridStateGrid::block(int node) const {
  return Eigen::Map<const cmat>(
      data.data() + static_cast<size_t>(node) * dim * dim, dim, dim);
}

double HybridStateGrid::total_trace() const {
  double t = 0.0;
  const int nn = grid.num_nodes();
  for (int i = 0; i < nn; ++i) t += block(i).trace().real();
  return t * grid.cell_volume();
}

rvec classical_marginal(const HybridStateDiscrete& s) {
  rvec p(s.num_points());
  for (int i = 0; i < s.num_points(); ++i) p(i) = s.blocks[i].trace().real();
  return p;
}

rvec classical_marginal(const HybridStateGrid& s) {
  const int nn = s.grid.num_nodes();
  rvec p(nn);
  for (int i = 0; i < nn; ++i) p(i) = s.block(i).trace().real();
  return p;
}

cmat conditional_state(const HybridStateDiscrete& s, int point,
                       double tol_zero) {
  const double w = s.blocks[point].trace().real();
  if (w <= tol_zero)
    throw ZeroProbability("conditional state at a zero-probability point");
  return s.blocks[point] / w;
}

cmat conditional_state_grid(const HybridStateGrid& s, int node,
                            double tol_zero) {
  const double w = s.block(node).trace().real();
  if (w <= tol_zero)
    throw ZeroProbability("conditional state at a zero-probability node");
  return s.block(node) / w;
}

double BlochDecomposition::length() const {
  return std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
}

BlochDecomposition bloch_decompose(const cmat& rho2, double tol_zero) {
  if (rho2.rows() != 2 || rho2.cols() != 2)
    throw ShapeMismatch("bloch_decompose expects a 2x2 matrix");
  if (!is_hermitian(rho2, 1e-8))
    throw NonHermitianInput("bloch_decompose expects a Hermitian matrix");
  BlochDecomposition d;
  d.weight = rho2.trace().real();
  if (d.weight <= tol_zero)
    throw ZeroProbability("bloch_decompose: zero-weight matrix");
  for (int i = 0; i < 3; ++i)
    d.s[i] = (pauli(i + 1) * rho2).trace().real() / d.weight;
  return d;
}

cmat bloch_assemble(double weight, const std::array<double, 3>& s) {
  cmat m = pauli(0);
  for (int i = 0; i < 3; ++i) m += s[i] * pauli(i + 1);
  return 0.5 * weight * m;
}

void concentrate(HybridStateGrid& state, const std::vector<double>& x0,
                 const cmat& rho_q, double width) {
  const int nn = state.grid.num_nodes();
  const int nd = state.grid.ndim();
  std::vector<double> weights(nn);
  double total = 0.0;
  for (int i = 0; i < nn; ++i) {
    auto x = state.grid.node_coords(i);
    double r2 = 0.0;
    for (int n = 0; n < nd; ++n) {
      double d = x[n] - x0[n];
      if (state.grid.periodic[n]) {
        const double span = state.grid.dims[n] * state.grid.spacing[n];
        d = std::remainder(d, span);
      }
      r2 += d * d;
    }
    weights[i] = std::exp(-0.5 * r2 / (width * width));
    total += weights[i];
  }
  if (total <= 0.0) throw ZeroProbability("concentrate: empty blob");
  const double cell = state.grid.cell_volume();
  for (int i = 0; i < nn; ++i)
    state.block(i) = (weights[i] / (total * cell)) * rho_q;
}

double max_hermiticity_defect(const HybridStateDiscrete& s) {
  double d = 0.0;
  for (const auto& b : s.blocks)
    d = std::max(d, (b - b.adjoint()).cwiseAbs().maxCoeff());
  return d;
}

double max_hermiticity_defect(const HybridStateGrid& s) {
  double d = 0.0;
  for (int i = 0; i < s.grid.num_nodes(); ++i) {
    cmat b = s.block(i);
    d = std::max(d, (b - b.adjoint()).cwiseAbs().maxCoeff());
  }
  return d;
}

double min_block_eigenvalue(const HybridStateDiscrete& s) {
  double m = 0.0;
  for (const auto& b : s.blocks)
    m = std::min(m, min_eigenvalue_hermitian(hermitize(b)));
  return m;
}

double min_block_eigenvalue(const HybridStateGrid& s) {
  double m = 0.0;
  for (int i = 0; i < s.grid.num_nodes(); ++i) {
    m = std::min(m, min_eigenvalue_hermitian(hermitize(s.block(i))));
  }
  return m;
}

}  // namespace hybridsim
