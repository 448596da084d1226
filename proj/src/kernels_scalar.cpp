#include "hybridsim/kernels.hpp"

// Reference implementations.  Complex products are spelled out in real
// arithmetic so the compiler is free to contract them; std::complex
// operator* would insert NaN-recovery branches.

namespace hybridsim::kernels::scalar {

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  const double* xd = reinterpret_cast<const double*>(x);
  double* yd = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = xd[2 * i], xi = xd[2 * i + 1];
    yd[2 * i] += ar * xr - ai * xi;
    yd[2 * i + 1] += ar * xi + ai * xr;
  }
}

void scal(cplx a, cplx* x, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  double* xd = reinterpret_cast<double*>(x);
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = xd[2 * i], xi = xd[2 * i + 1];
    xd[2 * i] = ar * xr - ai * xi;
    xd[2 * i + 1] = ar * xi + ai * xr;
  }
}

void add_scaled(cplx* dst, const cplx* src, cplx a, const cplx* k,
                std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  const double* sd = reinterpret_cast<const double*>(src);
  const double* kd = reinterpret_cast<const double*>(k);
  double* dd = reinterpret_cast<double*>(dst);
  for (std::size_t i = 0; i < n; ++i) {
    const double kr = kd[2 * i], ki = kd[2 * i + 1];
    dd[2 * i] = sd[2 * i] + ar * kr - ai * ki;
    dd[2 * i + 1] = sd[2 * i + 1] + ar * ki + ai * kr;
  }
}

double sqnorm(const cplx* x, std::size_t n) {
  const double* xd = reinterpret_cast<const double*>(x);
  double s = 0.0;
  for (std::size_t i = 0; i < 2 * n; ++i) s += xd[i] * xd[i];
  return s;
}

}  // namespace hybridsim::kernels::scalar
