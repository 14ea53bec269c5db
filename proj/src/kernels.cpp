#include "fedmax/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "fedmax/errors.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define FEDMAX_X86 1
#include <immintrin.h>
#endif
#if defined(__aarch64__)
#define FEDMAX_NEON 1
#include <arm_neon.h>
#endif

namespace fedmax::kernels {
namespace {

// ---------------------------------------------------------------- scalar ---

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sq_norm_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double sq_dist_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double* y, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

void scale_copy_scalar(double* dst, double a, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a * src[i];
}

void add_scalar(double* y, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void sub_scalar(double* y, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] -= x[i];
}

void corrected_step_scalar(double* v, double eta, const double* g,
                           const double* cl, const double* cg, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v[i] -= eta * (g[i] - cl[i] + cg[i]);
}

// ------------------------------------------------------------------ avx2 ---
// Two accumulators for the reductions; elementwise kernels use mul+add (no
// FMA) so they round exactly like the scalar reference.

#if FEDMAX_X86

__attribute__((target("avx2"))) double dot_avx2(const double* a,
                                                const double* b,
                                                std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                             _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                             _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                             _mm256_loadu_pd(b + i)));
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc0);
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

__attribute__((target("avx2"))) double sq_norm_avx2(const double* a,
                                                    std::size_t n) {
  return dot_avx2(a, a, n);
}

__attribute__((target("avx2"))) double sq_dist_avx2(const double* a,
                                                    const double* b,
                                                    std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                    _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double out = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    out += d * d;
  }
  return out;
}

__attribute__((target("avx2"))) void axpy_avx2(double* y, double a,
                                               const double* x,
                                               std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2"))) void scale_avx2(double* y, double a,
                                                std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] *= a;
}

__attribute__((target("avx2"))) void scale_copy_avx2(double* dst, double a,
                                                     const double* src,
                                                     std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(va, _mm256_loadu_pd(src + i)));
  }
  for (; i < n; ++i) dst[i] = a * src[i];
}

__attribute__((target("avx2"))) void add_avx2(double* y, const double* x,
                                              std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i),
                                          _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] += x[i];
}

__attribute__((target("avx2"))) void sub_avx2(double* y, const double* x,
                                              std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_sub_pd(_mm256_loadu_pd(y + i),
                                          _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] -= x[i];
}

__attribute__((target("avx2"))) void corrected_step_avx2(
    double* v, double eta, const double* g, const double* cl, const double* cg,
    std::size_t n) {
  const __m256d veta = _mm256_set1_pd(eta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d corr = _mm256_sub_pd(_mm256_loadu_pd(g + i),
                                 _mm256_loadu_pd(cl + i));
    corr = _mm256_add_pd(corr, _mm256_loadu_pd(cg + i));
    _mm256_storeu_pd(v + i, _mm256_sub_pd(_mm256_loadu_pd(v + i),
                                          _mm256_mul_pd(veta, corr)));
  }
  for (; i < n; ++i) v[i] -= eta * (g[i] - cl[i] + cg[i]);
}

#endif  // FEDMAX_X86

// ------------------------------------------------------------------ neon ---

#if FEDMAX_NEON

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  acc0 = vaddq_f64(acc0, acc1);
  double acc = vgetq_lane_f64(acc0, 0) + vgetq_lane_f64(acc0, 1);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sq_norm_neon(const double* a, std::size_t n) { return dot_neon(a, a, n); }

double sq_dist_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vaddq_f64(acc, vmulq_f64(d, d));
  }
  double out = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    out += d * d;
  }
  return out;
}

void axpy_neon(double* y, double a, const double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double* y, double a, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(va, vld1q_f64(y + i)));
  for (; i < n; ++i) y[i] *= a;
}

void scale_copy_neon(double* dst, double a, const double* src, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, vmulq_f64(va, vld1q_f64(src + i)));
  for (; i < n; ++i) dst[i] = a * src[i];
}

void add_neon(double* y, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += x[i];
}

void sub_neon(double* y, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vsubq_f64(vld1q_f64(y + i), vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] -= x[i];
}

void corrected_step_neon(double* v, double eta, const double* g,
                         const double* cl, const double* cg, std::size_t n) {
  const float64x2_t veta = vdupq_n_f64(eta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t corr = vsubq_f64(vld1q_f64(g + i), vld1q_f64(cl + i));
    corr = vaddq_f64(corr, vld1q_f64(cg + i));
    vst1q_f64(v + i, vsubq_f64(vld1q_f64(v + i), vmulq_f64(veta, corr)));
  }
  for (; i < n; ++i) v[i] -= eta * (g[i] - cl[i] + cg[i]);
}

#endif  // FEDMAX_NEON

// -------------------------------------------------------------- dispatch ---

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sq_norm)(const double*, std::size_t);
  double (*sq_dist)(const double*, const double*, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  void (*scale)(double*, double, std::size_t);
  void (*scale_copy)(double*, double, const double*, std::size_t);
  void (*add)(double*, const double*, std::size_t);
  void (*sub)(double*, const double*, std::size_t);
  void (*corrected_step)(double*, double, const double*, const double*,
                         const double*, std::size_t);
};

constexpr KernelTable kScalarTable = {
    dot_scalar, sq_norm_scalar, sq_dist_scalar,   axpy_scalar, scale_scalar,
    scale_copy_scalar, add_scalar, sub_scalar, corrected_step_scalar};

#if FEDMAX_X86
constexpr KernelTable kAvx2Table = {
    dot_avx2, sq_norm_avx2, sq_dist_avx2,   axpy_avx2, scale_avx2,
    scale_copy_avx2, add_avx2, sub_avx2, corrected_step_avx2};
#endif

#if FEDMAX_NEON
constexpr KernelTable kNeonTable = {
    dot_neon, sq_norm_neon, sq_dist_neon,   axpy_neon, scale_neon,
    scale_copy_neon, add_neon, sub_neon, corrected_step_neon};
#endif

struct Dispatch {
  const KernelTable* table = &kScalarTable;
  Backend backend = Backend::Scalar;
  Dispatch() {
    // Constructed once before main(); honors FEDMAX_SIMD from the start.
    apply_env(*this);
  }
  static void apply_env(Dispatch& d);
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

void set_backend(Dispatch& d, Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      d.table = &kScalarTable;
      break;
    case Backend::Avx2:
#if FEDMAX_X86
      d.table = &kAvx2Table;
      break;
#else
      throw ConfigError("avx2 backend not available on this platform");
#endif
    case Backend::Neon:
#if FEDMAX_NEON
      d.table = &kNeonTable;
      break;
#else
      throw ConfigError("neon backend not available on this platform");
#endif
  }
  d.backend = backend;
}

Backend best_supported() {
#if FEDMAX_X86
  if (__builtin_cpu_supports("avx2")) return Backend::Avx2;
#endif
#if FEDMAX_NEON
  return Backend::Neon;
#endif
  return Backend::Scalar;
}

void Dispatch::apply_env(Dispatch& d) {
  const char* env = std::getenv("FEDMAX_SIMD");
  std::string mode = env ? env : "auto";
  if (mode == "auto" || mode.empty()) {
    set_backend(d, best_supported());
  } else if (mode == "scalar") {
    set_backend(d, Backend::Scalar);
  } else if (mode == "avx2") {
    set_backend(d, Backend::Avx2);
  } else if (mode == "neon") {
    set_backend(d, Backend::Neon);
  } else {
    throw ConfigError("FEDMAX_SIMD must be auto, scalar, avx2 or neon; got '" +
                      mode + "'");
  }
}

}  // namespace

Backend active() { return dispatch().backend; }

bool supported(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if FEDMAX_X86
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::Neon:
#if FEDMAX_NEON
      return true;
#else
      return false;
#endif
  }
  return false;
}

const char* backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

void select(Backend backend) {
  if (!supported(backend)) {
    throw ConfigError(std::string("kernel backend '") + backend_name(backend) +
                      "' is not supported on this host");
  }
  set_backend(dispatch(), backend);
}

void select_from_env() { Dispatch::apply_env(dispatch()); }

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}
double sq_norm(const double* a, std::size_t n) {
  return dispatch().table->sq_norm(a, n);
}
double sq_dist(const double* a, const double* b, std::size_t n) {
  return dispatch().table->sq_dist(a, b, n);
}
void axpy(double* y, double a, const double* x, std::size_t n) {
  dispatch().table->axpy(y, a, x, n);
}
void scale(double* y, double a, std::size_t n) {
  dispatch().table->scale(y, a, n);
}
void scale_copy(double* dst, double a, const double* src, std::size_t n) {
  dispatch().table->scale_copy(dst, a, src, n);
}
void add(double* y, const double* x, std::size_t n) {
  dispatch().table->add(y, x, n);
}
void sub(double* y, const double* x, std::size_t n) {
  dispatch().table->sub(y, x, n);
}
void corrected_step(double* v, double eta, const double* g, const double* cl,
                    const double* cg, std::size_t n) {
  dispatch().table->corrected_step(v, eta, g, cl, cg, n);
}

}  // namespace fedmax::kernels
