#include <immintrin.h>

#include "hypolab/kernels.hpp"

// 4-wide double-precision variants. Tails fall back to scalar loops; the
// vector body uses FMA, so sums may round differently from the reference
// kernels (equivalence tests allow for that).

namespace hypolab::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void combine_avx2(const double* a, const double* x, const double* b, const double* y, double* out,
                  std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(x + i));
    v = _mm256_fmadd_pd(_mm256_loadu_pd(b + i), _mm256_loadu_pd(y + i), v);
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) out[i] = a[i] * x[i] + b[i] * y[i];
}

void matvec_avx2(const double* rows, std::size_t m, std::size_t n, const double* v, double* out) {
  for (std::size_t r = 0; r < m; ++r) out[r] = dot_avx2(rows + r * n, v, n);
}

double trapz_sq_avx2(const double* y, std::size_t m, double dt) {
  if (m < 2) return 0.0;
  double acc = dot_avx2(y, y, m);
  acc -= 0.5 * (y[0] * y[0] + y[m - 1] * y[m - 1]);
  return acc * dt;
}

double trapz_dot_avx2(const double* y, const double* z, std::size_t m, double dt) {
  if (m < 2) return 0.0;
  double acc = dot_avx2(y, z, m);
  acc -= 0.5 * (y[0] * z[0] + y[m - 1] * z[m - 1]);
  return acc * dt;
}

}  // namespace

const Kernels& avx2() {
  static const Kernels k = {"avx2",        dot_avx2,      axpy_avx2,     combine_avx2,
                            matvec_avx2,   trapz_sq_avx2, trapz_dot_avx2};
  return k;
}

}  // namespace hypolab::kernels
