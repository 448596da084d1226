#include "hybridsim/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace hybridsim::kernels {

namespace {

struct Backend {
  void (*axpy)(cplx, const cplx*, cplx*, std::size_t);
  void (*scal)(cplx, cplx*, std::size_t);
  void (*add_scaled)(cplx*, const cplx*, cplx, const cplx*, std::size_t);
  double (*sqnorm)(const cplx*, std::size_t);
  const char* name;
};

Backend pick_backend() {
  const char* force = std::getenv("HYBRIDSIM_SIMD");
#if defined(HYBRIDSIM_HAVE_AVX2_TU)
  const bool can_avx2 = avx2::supported();
  bool use_avx2 = can_avx2;
  if (force) {
    if (std::strcmp(force, "scalar") == 0) use_avx2 = false;
    if (std::strcmp(force, "avx2") == 0 && can_avx2) use_avx2 = true;
  }
  if (use_avx2)
    return {&avx2::axpy, &avx2::scal, &avx2::add_scaled, &avx2::sqnorm,
            "avx2"};
#else
  (void)force;
#endif
  return {&scalar::axpy, &scalar::scal, &scalar::add_scaled, &scalar::sqnorm,
          "scalar"};
}

const Backend& backend() {
  static const Backend b = pick_backend();
  return b;
}

}  // namespace

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  backend().axpy(a, x, y, n);
}
void scal(cplx a, cplx* x, std::size_t n) { backend().scal(a, x, n); }
void add_scaled(cplx* dst, const cplx* src, cplx a, const cplx* k,
                std::size_t n) {
  backend().add_scaled(dst, src, a, k, n);
}
double sqnorm(const cplx* x, std::size_t n) { return backend().sqnorm(x, n); }
const char* backend_name() { return backend().name; }

}  // namespace hybridsim::kernels
