#include "tqr/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "tqr/errors.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <cpuid.h>
#endif

namespace tqr::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  unsigned eax = 0, ebx = 0, ecx = 0, edx = 0;
  if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
  return (ebx & (1u << 5)) != 0;
#else
  return false;
#endif
}

Backend detect_backend() noexcept {
  if (const char* env = std::getenv("TQRM_KERNEL")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::Avx2))
      return Backend::Avx2;
    if (std::strcmp(env, "neon") == 0 && backend_available(Backend::Neon))
      return Backend::Neon;
    return Backend::Scalar;  // unknown or unavailable: stay safe
  }
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
  if (backend_available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::atomic<Backend>& backend_slot() noexcept {
  static std::atomic<Backend> slot{detect_backend()};
  return slot;
}

}  // namespace

bool backend_available(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return detail::avx2_compiled() && cpu_has_avx2();
    case Backend::Neon:
      return detail::neon_compiled();
  }
  return false;
}

Backend active_backend() noexcept { return backend_slot().load(); }

void set_backend(Backend b) {
  if (!backend_available(b))
    throw Error(ErrorCode::InvalidArgument,
                std::string("kernel backend not available: ") + backend_name(b));
  backend_slot().store(b);
}

const char* backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "?";
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  switch (active_backend()) {
    case Backend::Avx2:
      return detail::dot_avx2(a, b, n);
    case Backend::Neon:
      return detail::dot_neon(a, b, n);
    default:
      return detail::dot_scalar(a, b, n);
  }
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  switch (active_backend()) {
    case Backend::Avx2:
      detail::axpy_avx2(alpha, x, y, n);
      return;
    case Backend::Neon:
      detail::axpy_neon(alpha, x, y, n);
      return;
    default:
      detail::axpy_scalar(alpha, x, y, n);
  }
}

double max_abs(const double* x, std::size_t n) noexcept {
  switch (active_backend()) {
    case Backend::Avx2:
      return detail::max_abs_avx2(x, n);
    case Backend::Neon:
      return detail::max_abs_neon(x, n);
    default:
      return detail::max_abs_scalar(x, n);
  }
}

void laguerre_weighted_sum(int k, const double* w, std::size_t m_count,
                           const double* u, std::size_t n_points,
                           double* out) noexcept {
  switch (active_backend()) {
    case Backend::Avx2:
      detail::laguerre_weighted_sum_avx2(k, w, m_count, u, n_points, out);
      return;
    case Backend::Neon:
      detail::laguerre_weighted_sum_neon(k, w, m_count, u, n_points, out);
      return;
    default:
      detail::laguerre_weighted_sum_scalar(k, w, m_count, u, n_points, out);
  }
}

}  // namespace tqr::kernels
