#include "marc/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace marc::kernels {

namespace scalar_impl {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void dot_norms(const double* a, const double* b, std::size_t n,
               double& ab, double& aa, double& bb) {
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += a[i] * b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
  }
  ab = sab;
  aa = saa;
  bb = sbb;
}

void add_inplace(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void average2(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (a[i] + b[i]) * 0.5;
}

void scale(double* x, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

}  // namespace scalar_impl

namespace {

const Ops kScalarOps = {
    scalar_impl::dot,    scalar_impl::dot_norms, scalar_impl::add_inplace,
    scalar_impl::axpy,   scalar_impl::average2,  scalar_impl::scale,
};

#if MARC_HAVE_AVX2
bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#else
bool cpu_has_avx2() { return false; }
#endif

Backend resolve_active() {
  const char* env = std::getenv("MARC_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (cpu_has_avx2()) return Backend::avx2;
      std::fprintf(stderr, "marc: MARC_KERNELS=avx2 requested but unsupported here, using scalar\n");
      return Backend::scalar;
    }
    std::fprintf(stderr, "marc: ignoring unknown MARC_KERNELS value '%s'\n", env);
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

}  // namespace

#if MARC_HAVE_AVX2
// Defined in kernels_avx2.cpp, compiled with -mavx2 -mfma. Only dereferenced
// after the cpuid check above.
extern const Ops kAvx2Ops;
#endif

const Ops* ops(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &kScalarOps;
    case Backend::avx2:
#if MARC_HAVE_AVX2
      if (cpu_has_avx2()) return &kAvx2Ops;
#endif
      return nullptr;
  }
  return nullptr;
}

Backend active() {
  static const Backend chosen = resolve_active();
  return chosen;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "?";
}

}  // namespace marc::kernels
