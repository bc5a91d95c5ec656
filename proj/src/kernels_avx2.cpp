#include "tqr/kernels.hpp"

// AVX2 variants, 4 doubles per register. This file is the only one built
// with -mavx2; on other targets (or without the flag) every entry point
// forwards to the scalar reference so the symbols always link.

#if defined(__AVX2__)

#include <immintrin.h>

namespace tqr::kernels::detail {

bool avx2_compiled() noexcept { return true; }

namespace {

inline double hsum(__m256d v) noexcept {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

const __m256d kAbsMask =
    _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

}  // namespace

double dot_avx2(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y,
               std::size_t n) noexcept {
  __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double max_abs_avx2(const double* x, std::size_t n) noexcept {
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_and_pd(_mm256_loadu_pd(x + i), kAbsMask);
    vm = _mm256_max_pd(vm, v);
  }
  __m128d lo = _mm256_castpd256_pd128(vm);
  __m128d hi = _mm256_extractf128_pd(vm, 1);
  lo = _mm_max_pd(lo, hi);
  double m = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) {
    double v = x[i] < 0 ? -x[i] : x[i];
    if (v > m) m = v;
  }
  return m;
}

void laguerre_weighted_sum_avx2(int k, const double* w, std::size_t m_count,
                                const double* u, std::size_t n_points,
                                double* out) noexcept {
  // The ladder is element-wise in the abscissa, so four points ride one
  // register through the whole m loop; operation order matches the
  // scalar reference exactly.
  const double kd = static_cast<double>(k);
  std::size_t i = 0;
  for (; i + 4 <= n_points; i += 4) {
    __m256d ui = _mm256_loadu_pd(u + i);
    __m256d lm2 = _mm256_setzero_pd();
    __m256d lm1 = _mm256_set1_pd(1.0);
    __m256d acc =
        m_count > 0 ? _mm256_set1_pd(w[0]) : _mm256_setzero_pd();
    for (std::size_t m = 1; m < m_count; ++m) {
      const double md = static_cast<double>(m);
      __m256d c1 = _mm256_sub_pd(_mm256_set1_pd(2.0 * md - 1.0 + kd), ui);
      __m256d t = _mm256_sub_pd(_mm256_mul_pd(c1, lm1),
                                _mm256_mul_pd(_mm256_set1_pd(md - 1.0 + kd), lm2));
      __m256d lm = _mm256_div_pd(t, _mm256_set1_pd(md));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(w[m]), lm));
      lm2 = lm1;
      lm1 = lm;
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (i < n_points)
    laguerre_weighted_sum_scalar(k, w, m_count, u + i, n_points - i, out + i);
}

}  // namespace tqr::kernels::detail

#else  // no AVX2 at compile time: keep the symbols, forward to scalar

namespace tqr::kernels::detail {

bool avx2_compiled() noexcept { return false; }

double dot_avx2(const double* a, const double* b, std::size_t n) noexcept {
  return dot_scalar(a, b, n);
}

void axpy_avx2(double alpha, const double* x, double* y,
               std::size_t n) noexcept {
  axpy_scalar(alpha, x, y, n);
}

double max_abs_avx2(const double* x, std::size_t n) noexcept {
  return max_abs_scalar(x, n);
}

void laguerre_weighted_sum_avx2(int k, const double* w, std::size_t m_count,
                                const double* u, std::size_t n_points,
                                double* out) noexcept {
  laguerre_weighted_sum_scalar(k, w, m_count, u, n_points, out);
}

}  // namespace tqr::kernels::detail

#endif
