#ifndef TQR_KERNELS_HPP
#define TQR_KERNELS_HPP

#include <cstddef>

// Low-level array kernels used by the eigensolver, the density-matrix
// functionals, and the Wigner evaluator. Each operation has a scalar
// reference implementation plus SIMD variants (AVX2 on x86, NEON on ARM);
// the dispatched entry points pick a backend once, at first use, from a
// CPU feature probe. TQRM_KERNEL=scalar|avx2|neon overrides the probe.

namespace tqr::kernels {

enum class Backend { Scalar, Avx2, Neon };

// Backend selected by the dispatcher (after the optional env override).
Backend active_backend() noexcept;

// True when the backend is both compiled in and supported by this CPU.
bool backend_available(Backend b) noexcept;

// Force a backend; throws Error(InvalidArgument) if unavailable.
void set_backend(Backend b);

const char* backend_name(Backend b) noexcept;

// y . x
double dot(const double* a, const double* b, std::size_t n) noexcept;

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;

// max_i |x_i|
double max_abs(const double* x, std::size_t n) noexcept;

// out[i] = sum_m w[m] * L_m^(k)(u[i]) for each of the n_points abscissae,
// by the upward three-term ladder in m. Weights absorb the density-matrix
// entries and sign/normalization factors; see phonon.cpp.
void laguerre_weighted_sum(int k, const double* w, std::size_t m_count,
                           const double* u, std::size_t n_points,
                           double* out) noexcept;

// Per-backend entry points, used by the dispatcher and the equivalence
// tests. The SIMD variants fall back to scalar when their instruction set
// is not compiled in; never call the AVX2 ones on a CPU without AVX2.
namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) noexcept;
void axpy_scalar(double alpha, const double* x, double* y,
                 std::size_t n) noexcept;
double max_abs_scalar(const double* x, std::size_t n) noexcept;
void laguerre_weighted_sum_scalar(int k, const double* w, std::size_t m_count,
                                  const double* u, std::size_t n_points,
                                  double* out) noexcept;

double dot_avx2(const double* a, const double* b, std::size_t n) noexcept;
void axpy_avx2(double alpha, const double* x, double* y,
               std::size_t n) noexcept;
double max_abs_avx2(const double* x, std::size_t n) noexcept;
void laguerre_weighted_sum_avx2(int k, const double* w, std::size_t m_count,
                                const double* u, std::size_t n_points,
                                double* out) noexcept;

double dot_neon(const double* a, const double* b, std::size_t n) noexcept;
void axpy_neon(double alpha, const double* x, double* y,
               std::size_t n) noexcept;
double max_abs_neon(const double* x, std::size_t n) noexcept;
void laguerre_weighted_sum_neon(int k, const double* w, std::size_t m_count,
                                const double* u, std::size_t n_points,
                                double* out) noexcept;

bool avx2_compiled() noexcept;
bool neon_compiled() noexcept;

}  // namespace detail

}  // namespace tqr::kernels

#endif
