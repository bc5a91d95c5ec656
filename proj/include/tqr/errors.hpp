#ifndef TQR_ERRORS_HPP
#define TQR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tqr {

// Failure classes that callers can act on. The CLI maps any of these to
// exit code 3 and prints the code name in its stderr JSON.
enum class ErrorCode {
  InvalidArgument,     // parameter or precondition violation
  PoleProximity,       // trial energy inside a pole guard band
  ZeroCoupling,        // g = 0 or eps = 0 handed to the recursion solver
  SeedUnderflow,       // both displaced-basis overlap sums underflowed
  NonConvergentSeries, // series cap reached with tail above threshold
  SectorUnavailable,   // resonant sector requested with eps != 0
  NonConvergence,      // eigensolver iteration budget exhausted
  TruncationCeiling,   // convergence doubling hit the hard n_max cap
  NotAState,           // density matrix fails PSD/trace tolerances
};

inline const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::PoleProximity: return "PoleProximity";
    case ErrorCode::ZeroCoupling: return "ZeroCoupling";
    case ErrorCode::SeedUnderflow: return "SeedUnderflow";
    case ErrorCode::NonConvergentSeries: return "NonConvergentSeries";
    case ErrorCode::SectorUnavailable: return "SectorUnavailable";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::TruncationCeiling: return "TruncationCeiling";
    case ErrorCode::NotAState: return "NotAState";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what_arg)
      : std::runtime_error(what_arg), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tqr

#endif
