#include "tqr/kernels.hpp"

#include <cmath>

// Reference implementations. These define the semantics; the SIMD
// variants must agree with them up to reduction-order rounding.

namespace tqr::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y,
                 std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double max_abs_scalar(const double* x, std::size_t n) noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = std::fabs(x[i]);
    if (v > m) m = v;
  }
  return m;
}

void laguerre_weighted_sum_scalar(int k, const double* w, std::size_t m_count,
                                  const double* u, std::size_t n_points,
                                  double* out) noexcept {
  // out[i] = sum_m w[m] L_m^(k)(u[i]), upward ladder
  //   m L_m = (2m - 1 + k - u) L_{m-1} - (m - 1 + k) L_{m-2}.
  for (std::size_t i = 0; i < n_points; ++i) {
    const double ui = u[i];
    double lm2 = 0.0;
    double lm1 = 1.0;  // L_0
    double acc = m_count > 0 ? w[0] : 0.0;
    for (std::size_t m = 1; m < m_count; ++m) {
      const double md = static_cast<double>(m);
      const double lm =
          ((2.0 * md - 1.0 + k - ui) * lm1 - (md - 1.0 + k) * lm2) / md;
      acc += w[m] * lm;
      lm2 = lm1;
      lm1 = lm;
    }
    out[i] = acc;
  }
}

}  // namespace tqr::kernels::detail
