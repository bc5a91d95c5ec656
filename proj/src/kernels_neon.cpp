#include "tqr/kernels.hpp"

// NEON variants, 2 doubles per register, for AArch64 builds. Compiled
// whenever the target advertises Advanced SIMD; otherwise the entry
// points forward to the scalar reference.

#if defined(__ARM_NEON) && defined(__aarch64__)

#include <arm_neon.h>

namespace tqr::kernels::detail {

bool neon_compiled() noexcept { return true; }

double dot_neon(const double* a, const double* b, std::size_t n) noexcept {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y,
               std::size_t n) noexcept {
  float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vaddq_f64(vy, vmulq_f64(va, vld1q_f64(x + i)));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double max_abs_neon(const double* x, std::size_t n) noexcept {
  float64x2_t vm = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vm = vmaxq_f64(vm, vabsq_f64(vld1q_f64(x + i)));
  double m = vgetq_lane_f64(vm, 0);
  double m1 = vgetq_lane_f64(vm, 1);
  if (m1 > m) m = m1;
  for (; i < n; ++i) {
    double v = x[i] < 0 ? -x[i] : x[i];
    if (v > m) m = v;
  }
  return m;
}

void laguerre_weighted_sum_neon(int k, const double* w, std::size_t m_count,
                                const double* u, std::size_t n_points,
                                double* out) noexcept {
  const double kd = static_cast<double>(k);
  std::size_t i = 0;
  for (; i + 2 <= n_points; i += 2) {
    float64x2_t ui = vld1q_f64(u + i);
    float64x2_t lm2 = vdupq_n_f64(0.0);
    float64x2_t lm1 = vdupq_n_f64(1.0);
    float64x2_t acc = m_count > 0 ? vdupq_n_f64(w[0]) : vdupq_n_f64(0.0);
    for (std::size_t m = 1; m < m_count; ++m) {
      const double md = static_cast<double>(m);
      float64x2_t c1 = vsubq_f64(vdupq_n_f64(2.0 * md - 1.0 + kd), ui);
      float64x2_t t = vsubq_f64(vmulq_f64(c1, lm1),
                                vmulq_f64(vdupq_n_f64(md - 1.0 + kd), lm2));
      float64x2_t lm = vdivq_f64(t, vdupq_n_f64(md));
      acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(w[m]), lm));
      lm2 = lm1;
      lm1 = lm;
    }
    vst1q_f64(out + i, acc);
  }
  if (i < n_points)
    laguerre_weighted_sum_scalar(k, w, m_count, u + i, n_points - i, out + i);
}

}  // namespace tqr::kernels::detail

#else

namespace tqr::kernels::detail {

bool neon_compiled() noexcept { return false; }

double dot_neon(const double* a, const double* b, std::size_t n) noexcept {
  return dot_scalar(a, b, n);
}

void axpy_neon(double alpha, const double* x, double* y,
               std::size_t n) noexcept {
  axpy_scalar(alpha, x, y, n);
}

double max_abs_neon(const double* x, std::size_t n) noexcept {
  return max_abs_scalar(x, n);
}

void laguerre_weighted_sum_neon(int k, const double* w, std::size_t m_count,
                                const double* u, std::size_t n_points,
                                double* out) noexcept {
  laguerre_weighted_sum_scalar(k, w, m_count, u, n_points, out);
}

}  // namespace tqr::kernels::detail

#endif
