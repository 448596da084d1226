#include "doctest.h"

#include <complex>
#include <string>
#include <vector>

#include "hybridsim/kernels.hpp"
#include "hybridsim/rng.hpp"

using hybridsim::Philox;
using namespace hybridsim::kernels;

namespace {

std::vector<cplx> random_array(std::size_t n, std::uint64_t stream) {
  Philox rng(777, stream);
  std::vector<cplx> v(n);
  for (auto& z : v) z = cplx(rng.next_gaussian(), rng.next_gaussian());
  return v;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("scalar kernels agree with plain complex arithmetic") {
  for (std::size_t n : {0u, 1u, 2u, 3u, 7u, 64u, 129u}) {
    auto x = random_array(n, 1);
    auto y = random_array(n, 2);
    const cplx a(0.3, -1.7);

    auto y_ref = y;
    for (std::size_t i = 0; i < n; ++i) y_ref[i] += a * x[i];
    auto y_got = y;
    scalar::axpy(a, x.data(), y_got.data(), n);
    CHECK(max_abs_diff(y_ref, y_got) < 1e-14);

    auto s_ref = x;
    for (auto& z : s_ref) z *= a;
    auto s_got = x;
    scalar::scal(a, s_got.data(), n);
    CHECK(max_abs_diff(s_ref, s_got) < 1e-14);

    std::vector<cplx> d_ref(n), d_got(n);
    for (std::size_t i = 0; i < n; ++i) d_ref[i] = y[i] + a * x[i];
    scalar::add_scaled(d_got.data(), y.data(), a, x.data(), n);
    CHECK(max_abs_diff(d_ref, d_got) < 1e-14);

    double q_ref = 0;
    for (const auto& z : x) q_ref += std::norm(z);
    CHECK(scalar::sqnorm(x.data(), n) == doctest::Approx(q_ref).epsilon(1e-13));
  }
}

#if defined(HYBRIDSIM_HAVE_AVX2_TU)
TEST_CASE("avx2 kernels match the scalar reference") {
  if (!avx2::supported()) {
    MESSAGE("avx2 not available on this host; skipping");
    return;
  }
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 63u, 64u, 257u, 1024u}) {
    auto x = random_array(n, 3);
    auto y = random_array(n, 4);
    const cplx a(-0.9, 0.4);

    auto y_s = y, y_v = y;
    scalar::axpy(a, x.data(), y_s.data(), n);
    avx2::axpy(a, x.data(), y_v.data(), n);
    CHECK(max_abs_diff(y_s, y_v) < 1e-13);

    auto x_s = x, x_v = x;
    scalar::scal(a, x_s.data(), n);
    avx2::scal(a, x_v.data(), n);
    CHECK(max_abs_diff(x_s, x_v) < 1e-13);

    std::vector<cplx> d_s(n), d_v(n);
    scalar::add_scaled(d_s.data(), y.data(), a, x.data(), n);
    avx2::add_scaled(d_v.data(), y.data(), a, x.data(), n);
    CHECK(max_abs_diff(d_s, d_v) < 1e-13);

    const double q_s = scalar::sqnorm(x.data(), n);
    const double q_v = avx2::sqnorm(x.data(), n);
    CHECK(q_v == doctest::Approx(q_s).epsilon(1e-12));
  }
}
#endif

TEST_CASE("dispatched kernels are deterministic") {
  auto x = random_array(100, 5);
  auto y1 = random_array(100, 6);
  auto y2 = y1;
  axpy(cplx(1.5, 0.5), x.data(), y1.data(), 100);
  axpy(cplx(1.5, 0.5), x.data(), y2.data(), 100);
  CHECK(max_abs_diff(y1, y2) == 0.0);
  MESSAGE("active kernel backend: ", backend_name());
}

TEST_CASE("add_scaled tolerates dst aliasing src") {
  auto x = random_array(33, 7);
  auto y = random_array(33, 8);
  const cplx a(0.25, 1.0);
  std::vector<cplx> ref(33);
  scalar::add_scaled(ref.data(), y.data(), a, x.data(), 33);
  auto got = y;
  add_scaled(got.data(), got.data(), a, x.data(), 33);
  CHECK(max_abs_diff(ref, got) < 1e-13);
}
