#pragma once

#include <cstddef>

namespace fedmax::kernels {

// Dense double-precision kernels behind all vector arithmetic in the library.
// A scalar reference implementation always exists; on x86-64 an AVX2 variant
// is selected at runtime when the CPU supports it (or forced through the
// FEDMAX_SIMD environment variable: auto | scalar | avx2 | neon).
//
// Elementwise kernels (axpy, scale, scale_copy, add, sub, corrected_step)
// produce bit-identical results across backends: lanes are independent and no
// FMA contraction is used. Reductions (dot, sq_norm, sq_dist) may differ from
// the scalar backend by summation order only.
enum class Backend { Scalar, Avx2, Neon };

Backend active();
bool supported(Backend backend);
const char* backend_name(Backend backend);

// Selects a backend process-wide. Throws ConfigError if unsupported on this
// host. Not safe to call concurrently with running kernels.
void select(Backend backend);

// Applies FEDMAX_SIMD if set, otherwise picks the best supported backend.
void select_from_env();

double dot(const double* a, const double* b, std::size_t n);
double sq_norm(const double* a, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);

// y += a * x
void axpy(double* y, double a, const double* x, std::size_t n);
// y *= a
void scale(double* y, double a, std::size_t n);
// dst = a * src
void scale_copy(double* dst, double a, const double* src, std::size_t n);
// y += x
void add(double* y, const double* x, std::size_t n);
// y -= x
void sub(double* y, const double* x, std::size_t n);
// v -= eta * (g - c_local + c_global); the corrected local update step
void corrected_step(double* v, double eta, const double* g,
                    const double* c_local, const double* c_global,
                    std::size_t n);

}  // namespace fedmax::kernels
