#include "hybridsim/kernels.hpp"

#if defined(HYBRIDSIM_HAVE_AVX2_TU)

#include <immintrin.h>

// AVX2 variants.  A 256-bit lane holds two interleaved complex doubles
// (re0, im0, re1, im1); complex multiply uses the permute/addsub idiom.

namespace hybridsim::kernels::avx2 {

bool supported() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

// (ar + i*ai) * lane of two complex numbers
inline __m256d cmul(__m256d var, __m256d vai, __m256d vx) {
  __m256d sw = _mm256_permute_pd(vx, 0x5);  // swap re/im within each pair
  return _mm256_addsub_pd(_mm256_mul_pd(var, vx), _mm256_mul_pd(vai, sw));
}

}  // namespace

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const __m256d var = _mm256_set1_pd(a.real());
  const __m256d vai = _mm256_set1_pd(a.imag());
  const double* xd = reinterpret_cast<const double*>(x);
  double* yd = reinterpret_cast<double*>(y);
  const std::size_t nd = 2 * n;
  std::size_t i = 0;
  for (; i + 4 <= nd; i += 4) {
    __m256d vx = _mm256_loadu_pd(xd + i);
    __m256d vy = _mm256_loadu_pd(yd + i);
    _mm256_storeu_pd(yd + i, _mm256_add_pd(vy, cmul(var, vai, vx)));
  }
  if (i < nd) {  // one complex left
    const double xr = xd[i], xi = xd[i + 1];
    yd[i] += a.real() * xr - a.imag() * xi;
    yd[i + 1] += a.real() * xi + a.imag() * xr;
  }
}

void scal(cplx a, cplx* x, std::size_t n) {
  const __m256d var = _mm256_set1_pd(a.real());
  const __m256d vai = _mm256_set1_pd(a.imag());
  double* xd = reinterpret_cast<double*>(x);
  const std::size_t nd = 2 * n;
  std::size_t i = 0;
  for (; i + 4 <= nd; i += 4) {
    __m256d vx = _mm256_loadu_pd(xd + i);
    _mm256_storeu_pd(xd + i, cmul(var, vai, vx));
  }
  if (i < nd) {
    const double xr = xd[i], xi = xd[i + 1];
    xd[i] = a.real() * xr - a.imag() * xi;
    xd[i + 1] = a.real() * xi + a.imag() * xr;
  }
}

void add_scaled(cplx* dst, const cplx* src, cplx a, const cplx* k,
                std::size_t n) {
  const __m256d var = _mm256_set1_pd(a.real());
  const __m256d vai = _mm256_set1_pd(a.imag());
  const double* sd = reinterpret_cast<const double*>(src);
  const double* kd = reinterpret_cast<const double*>(k);
  double* dd = reinterpret_cast<double*>(dst);
  const std::size_t nd = 2 * n;
  std::size_t i = 0;
  for (; i + 4 <= nd; i += 4) {
    __m256d vs = _mm256_loadu_pd(sd + i);
    __m256d vk = _mm256_loadu_pd(kd + i);
    _mm256_storeu_pd(dd + i, _mm256_add_pd(vs, cmul(var, vai, vk)));
  }
  if (i < nd) {
    const double kr = kd[i], ki = kd[i + 1];
    dd[i] = sd[i] + a.real() * kr - a.imag() * ki;
    dd[i + 1] = sd[i + 1] + a.real() * ki + a.imag() * kr;
  }
}

double sqnorm(const cplx* x, std::size_t n) {
  const double* xd = reinterpret_cast<const double*>(x);
  const std::size_t nd = 2 * n;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= nd; i += 4) {
    __m256d vx = _mm256_loadu_pd(xd + i);
    acc = _mm256_fmadd_pd(vx, vx, acc);
  }
  double lanes[4];
  _mm256_storeu_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < nd; ++i) s += xd[i] * xd[i];
  return s;
}

}  // namespace hybridsim::kernels::avx2

#endif  // HYBRIDSIM_HAVE_AVX2_TU
