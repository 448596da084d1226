#pragma once

#include <complex>
#include <cstddef>

// Data-parallel inner loops used by the integrators and the grid solver.
// All entry points dispatch at runtime to the best available backend
// (AVX2 on x86-64 with OS support, otherwise the scalar reference).
// Set HYBRIDSIM_SIMD=scalar|avx2 to force a backend.

namespace hybridsim::kernels {

using cplx = std::complex<double>;

// y[i] += a * x[i]
void axpy(cplx a, const cplx* x, cplx* y, std::size_t n);
// x[i] *= a
void scal(cplx a, cplx* x, std::size_t n);
// dst[i] = src[i] + a * k[i]   (dst may alias src, not k)
void add_scaled(cplx* dst, const cplx* src, cplx a, const cplx* k,
                std::size_t n);
// sum_i |x[i]|^2
double sqnorm(const cplx* x, std::size_t n);

const char* backend_name();

namespace scalar {
void axpy(cplx a, const cplx* x, cplx* y, std::size_t n);
void scal(cplx a, cplx* x, std::size_t n);
void add_scaled(cplx* dst, const cplx* src, cplx a, const cplx* k,
                std::size_t n);
double sqnorm(const cplx* x, std::size_t n);
}  // namespace scalar

#if defined(HYBRIDSIM_HAVE_AVX2_TU)
namespace avx2 {
bool supported();
void axpy(cplx a, const cplx* x, cplx* y, std::size_t n);
void scal(cplx a, cplx* x, std::size_t n);
void add_scaled(cplx* dst, const cplx* src, cplx a, const cplx* k,
                std::size_t n);
double sqnorm(const cplx* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace hybridsim::kernels
