#include <immintrin.h>

#include "confsets/kernels.hpp"

namespace confsets::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += pa[i] * pb[i];
  return s;
}

double sum_squares(std::span<const double> a) { return dot(a, a); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const double* px = x.data();
  double* py = y.data();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i));
    _mm256_storeu_pd(py + i, r);
  }
  for (; i < n; ++i) py[i] += alpha * px[i];
}

double project_out(std::span<const double> q, std::span<double> r) {
  const double c = dot(q, r);
  axpy(-c, q, r);
  return c;
}

void gemv_cols(const double* a, std::size_t rows, std::size_t count, std::size_t ld,
               std::span<const double> w, std::span<double> out) {
  double* po = out.data();
  std::size_t i = 0;
  for (; i + 4 <= rows; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < count; ++j)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + j * ld + i), _mm256_set1_pd(w[j]), acc);
    _mm256_storeu_pd(po + i, acc);
  }
  for (; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < count; ++j) s += a[j * ld + i] * w[j];
    po[i] = s;
  }
}

}  // namespace confsets::kernels::avx2
