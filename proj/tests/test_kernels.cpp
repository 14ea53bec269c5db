#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedmax/errors.hpp"
#include "fedmax/kernels.hpp"
#include "fedmax/rng.hpp"

using namespace fedmax;
namespace k = fedmax::kernels;

namespace {

std::vector<double> random_buf(RngStream& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * rng.next_unit() - 1.0;
  return v;
}

struct BackendGuard {
  k::Backend saved = k::active();
  ~BackendGuard() { k::select(saved); }
};

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(k::supported(k::Backend::Scalar));
  BackendGuard guard;
  k::select(k::Backend::Scalar);
  CHECK(k::active() == k::Backend::Scalar);
}

TEST_CASE("unsupported backend selection throws") {
  if (!k::supported(k::Backend::Neon)) {
    CHECK_THROWS_AS(k::select(k::Backend::Neon), ConfigError);
  }
  if (!k::supported(k::Backend::Avx2)) {
    CHECK_THROWS_AS(k::select(k::Backend::Avx2), ConfigError);
  }
}

TEST_CASE("simd elementwise kernels match scalar bit for bit") {
  const k::Backend simd = k::supported(k::Backend::Avx2)   ? k::Backend::Avx2
                          : k::supported(k::Backend::Neon) ? k::Backend::Neon
                                                           : k::Backend::Scalar;
  if (simd == k::Backend::Scalar) return;  // nothing to compare on this host
  BackendGuard guard;

  RngStream rng = derive_stream(99, 0, 0, 0, 0);
  // deliberately covers all tail lengths
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u,
                        31u, 64u, 65u, 123u}) {
    const auto x = random_buf(rng, n);
    const auto y0 = random_buf(rng, n);
    const auto cl = random_buf(rng, n);
    const auto cg = random_buf(rng, n);
    const double a = 2.0 * rng.next_unit() - 1.0;

    auto run = [&](k::Backend b) {
      k::select(b);
      std::vector<double> axpy_out = y0, scale_out = y0, add_out = y0,
                          sub_out = y0, step_out = y0, copy_out(n);
      k::axpy(axpy_out.data(), a, x.data(), n);
      k::scale(scale_out.data(), a, n);
      k::scale_copy(copy_out.data(), a, x.data(), n);
      k::add(add_out.data(), x.data(), n);
      k::sub(sub_out.data(), x.data(), n);
      k::corrected_step(step_out.data(), a, x.data(), cl.data(), cg.data(), n);
      return std::vector<std::vector<double>>{axpy_out, scale_out, copy_out,
                                              add_out, sub_out, step_out};
    };
    const auto ref = run(k::Backend::Scalar);
    const auto got = run(simd);
    for (std::size_t op = 0; op < ref.size(); ++op) {
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(ref[op][i] == got[op][i]);
      }
    }
  }
}

TEST_CASE("simd reductions match scalar to summation-order tolerance") {
  const k::Backend simd = k::supported(k::Backend::Avx2)   ? k::Backend::Avx2
                          : k::supported(k::Backend::Neon) ? k::Backend::Neon
                                                           : k::Backend::Scalar;
  if (simd == k::Backend::Scalar) return;
  BackendGuard guard;

  RngStream rng = derive_stream(7, 0, 0, 0, 1);
  for (std::size_t n : {1u, 3u, 4u, 9u, 33u, 100u, 1000u}) {
    const auto x = random_buf(rng, n);
    const auto y = random_buf(rng, n);
    k::select(k::Backend::Scalar);
    const double dot_ref = k::dot(x.data(), y.data(), n);
    const double nrm_ref = k::sq_norm(x.data(), n);
    const double dst_ref = k::sq_dist(x.data(), y.data(), n);
    k::select(simd);
    const double tol = 1e-13 * static_cast<double>(n);
    CHECK(std::fabs(k::dot(x.data(), y.data(), n) - dot_ref) <=
          tol * (1.0 + std::fabs(dot_ref)));
    CHECK(std::fabs(k::sq_norm(x.data(), n) - nrm_ref) <=
          tol * (1.0 + nrm_ref));
    CHECK(std::fabs(k::sq_dist(x.data(), y.data(), n) - dst_ref) <=
          tol * (1.0 + dst_ref));
  }
}

TEST_CASE("dot agrees with a compensated reference") {
  RngStream rng = derive_stream(3, 0, 0, 0, 2);
  const std::size_t n = 501;
  const auto x = random_buf(rng, n);
  const auto y = random_buf(rng, n);
  long double exact = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    exact += static_cast<long double>(x[i]) * static_cast<long double>(y[i]);
  }
  const double got = k::dot(x.data(), y.data(), n);
  CHECK(std::fabs(got - static_cast<double>(exact)) <= 1e-12);
}
