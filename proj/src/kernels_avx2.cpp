// AVX2+FMA kernel backend. This translation unit is compiled with
// -mavx2 -mfma -ffp-contract=off and is reached only after a cpuid check.
// Contraction is disabled so the elementwise kernels and the tail loops round
// exactly like the scalar reference; FMA appears only through explicit
// intrinsics in the reduction kernels.

#include "marc/kernels.hpp"

#if MARC_HAVE_AVX2

#include <immintrin.h>

namespace marc::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d hi64 = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, hi64));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 3 < n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_fmadd_pd(va, vb, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void dot_norms_avx2(const double* a, const double* b, std::size_t n,
                    double& ab, double& aa, double& bb) {
  __m256d acc_ab = _mm256_setzero_pd();
  __m256d acc_aa = _mm256_setzero_pd();
  __m256d acc_bb = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 3 < n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    acc_ab = _mm256_fmadd_pd(va, vb, acc_ab);
    acc_aa = _mm256_fmadd_pd(va, va, acc_aa);
    acc_bb = _mm256_fmadd_pd(vb, vb, acc_bb);
  }
  double sab = hsum(acc_ab), saa = hsum(acc_aa), sbb = hsum(acc_bb);
  for (; i < n; ++i) {
    sab += a[i] * b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
  }
  ab = sab;
  aa = saa;
  bb = sbb;
}

void add_inplace_avx2(double* acc, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 3 < n; i += 4) {
    __m256d v = _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(acc + i, v);
  }
  for (; i < n; ++i) acc[i] += x[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 3 < n; i += 4) {
    // mul then add, two roundings, matching the scalar reference exactly
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void average2_avx2(const double* a, const double* b, double* out, std::size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 3 < n; i += 4) {
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(s, half));
  }
  for (; i < n; ++i) out[i] = (a[i] + b[i]) * 0.5;
}

void scale_avx2(double* x, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 3 < n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
  }
  for (; i < n; ++i) x[i] *= s;
}

}  // namespace

extern const Ops kAvx2Ops;
const Ops kAvx2Ops = {
    dot_avx2, dot_norms_avx2, add_inplace_avx2, axpy_avx2, average2_avx2, scale_avx2,
};

}  // namespace marc::kernels

#endif  // MARC_HAVE_AVX2
