#include "hybridsim/types.hpp"

#include "hybridsim/errors.hpp"

namespace hybridsim {

cmat pauli(int i) {
  cmat m(2, 2);
  switch (i) {
    case 0:
      m << 1, 0, 0, 1;
      break;
    case 1:
      m << 0, 1, 1, 0;
      break;
    case 2:
      m << 0, cplx(0, -1), cplx(0, 1), 0;
      break;
    case 3:
      m << 1, 0, 0, -1;
      break;
    default:
      throw Error("pauli index must be 0..3");
  }
  return m;
}

bool is_hermitian(const cmat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

cmat hermitize(const cmat& m) { return 0.5 * (m + m.adjoint()); }

double min_eigenvalue_hermitian(const cmat& m) {
  Eigen::SelfAdjointEigenSolver<cmat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

cmat sqrt_psd(const cmat& m) {
  Eigen::SelfAdjointEigenSolver<cmat> es(m);
  rvec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

bool all_finite(const cmat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
        return false;
    }
  return true;
}

bool all_finite(const cvec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag())) return false;
  }
  return true;
}

}  // namespace hybridsim
