#pragma once

// Low-level numeric kernels with runtime backend selection.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2+FMA
// variant. The backend is resolved once per process: the MARC_KERNELS environment
// variable ("scalar" or "avx2") wins if set, otherwise AVX2 is used when the CPU
// supports it. Elementwise kernels (add_inplace, axpy, average2, scale) produce
// bit-identical results on every backend because they round each element the same
// way and never contract to FMA. Reduction kernels (dot, dot_norms) may differ
// across backends in the last bits because the summation order differs; on one
// machine the active backend is fixed, so repeated runs stay byte-identical.

#include <cstddef>

namespace marc::kernels {

enum class Backend { scalar, avx2 };

struct Ops {
  double (*dot)(const double*, const double*, std::size_t);
  // One pass producing dot(a,b), dot(a,a), dot(b,b).
  void (*dot_norms)(const double*, const double*, std::size_t,
                    double& ab, double& aa, double& bb);
  void (*add_inplace)(double* acc, const double* x, std::size_t);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t);
  void (*average2)(const double* a, const double* b, double* out, std::size_t);
  void (*scale)(double* x, double s, std::size_t);
};

// Table for a specific backend, or nullptr when that backend is unavailable
// on this CPU/build. The scalar table always exists.
const Ops* ops(Backend b);

// Backend chosen at process start (env override applied). Stable for the
// lifetime of the process.
Backend active();
const char* backend_name(Backend b);

// Convenience wrappers over the active backend.
inline double dot(const double* a, const double* b, std::size_t n) {
  return ops(active())->dot(a, b, n);
}
inline void dot_norms(const double* a, const double* b, std::size_t n,
                      double& ab, double& aa, double& bb) {
  ops(active())->dot_norms(a, b, n, ab, aa, bb);
}
inline void add_inplace(double* acc, const double* x, std::size_t n) {
  ops(active())->add_inplace(acc, x, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  ops(active())->axpy(alpha, x, y, n);
}
inline void average2(const double* a, const double* b, double* out, std::size_t n) {
  ops(active())->average2(a, b, out, n);
}
inline void scale(double* x, double s, std::size_t n) {
  ops(active())->scale(x, s, n);
}

}  // namespace marc::kernels
