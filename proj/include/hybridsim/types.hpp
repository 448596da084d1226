#pragma once

#include <Eigen/Dense>
#include <complex>

namespace hybridsim {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rmat = Eigen::MatrixXd;
using rvec = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

// Default numeric tolerances; every entry can be overridden per call site.
struct Tolerances {
  double norm = 1e-8;    // trace / vector norm checks
  double psd = 1e-9;     // eigenvalue floor for positivity verdicts
  double zero = 1e-12;   // below this a probability counts as zero
  double rank = 1e-10;   // relative eigenvalue cutoff for numerical rank
};

// Pauli matrices; index 0 is the identity.  Convention: sigma3 is diagonal
// with |0> (first basis vector) its +1 eigenvector.
cmat pauli(int i);

bool is_hermitian(const cmat& m, double tol = 1e-10);
cmat hermitize(const cmat& m);  // (m + m^dagger)/2

double min_eigenvalue_hermitian(const cmat& m);

// Square root of a Hermitian PSD matrix; eigenvalues clipped at zero.
cmat sqrt_psd(const cmat& m);

bool all_finite(const cmat& m);
bool all_finite(const cvec& v);

}  // namespace hybridsim
