#ifndef TQR_MODEL_HPP
#define TQR_MODEL_HPP

#include <vector>

#include "tqr/errors.hpp"

// Operator construction for the tripartite spin-spin-phonon model
//
//   H = w a'a + W(s1x + s2x) + eps(s1z + s2z) + g(a' + a) s1z s2z
//
// and its pi/2 y-rotated form, on a hard-truncated Fock ladder. Basis
// ordering everywhere is (spin-pair index) (x) (Fock index), spin-major,
// so each spin pair owns a contiguous block of n_max+1 phonon amplitudes.

namespace tqr {

struct ModelParams {
  double omega = 1.0;    // phonon frequency, > 0
  double Omega = 0.0;    // Rabi frequency, >= 0
  double epsilon = 0.0;  // detuning (the Hamiltonian carries eps, not 2*eps)
  double g = 0.0;        // tripartite coupling
};

// Throws Error(InvalidArgument) on non-finite fields, omega <= 0, Omega < 0.
void validate(const ModelParams& params);

struct FockTruncation {
  int n_max = 120;        // phonon cutoff, >= 1
  int growth_factor = 2;  // multiplier for convergence doubling, >= 2
  double tol = 1e-9;      // relative energy tolerance for doubling
};

void validate(const FockTruncation& trunc);

enum class Frame { Original, Rotated };

// Computational blocks of the model. The resonant sectors exist only at
// eps = 0; the triplet/singlet split holds for any eps.
enum class Sector {
  Full,               // spin dimension 4
  TripletRotated,     // exchange-symmetric rotated block, spin dimension 3
  SingletRotated,     // antisymmetric block, spin dimension 1
  ResonantCollective, // {up-up, down-down} rotated block, spin dimension 2
  ResonantPlus,       // even parity half of the collective block
  ResonantMinus,      // odd parity half
};

int spin_dimension(Sector sector) noexcept;
const char* sector_name(Sector sector) noexcept;

class RealSymmetricMatrix {
 public:
  RealSymmetricMatrix() = default;
  explicit RealSymmetricMatrix(int dim)
      : dim_(dim), entries_(static_cast<std::size_t>(dim) * dim, 0.0) {}

  int dim() const noexcept { return dim_; }
  double& at(int i, int j) { return entries_[std::size_t(i) * dim_ + j]; }
  double at(int i, int j) const { return entries_[std::size_t(i) * dim_ + j]; }
  double* data() noexcept { return entries_.data(); }
  const double* data() const noexcept { return entries_.data(); }

  // Largest |a_ij - a_ji| relative to the larger of the pair magnitudes.
  double max_asymmetry() const noexcept;

 private:
  int dim_ = 0;
  std::vector<double> entries_;
};

// Full 4(n_max+1)-dimensional Hamiltonian in the requested frame.
RealSymmetricMatrix build_hamiltonian(const ModelParams& params,
                                      const FockTruncation& trunc,
                                      Frame frame);

// Projected block for the requested sector (see Sector for dimensions).
// Throws Error(SectorUnavailable) for resonant sectors at eps != 0.
RealSymmetricMatrix build_sector_hamiltonian(const ModelParams& params,
                                             const FockTruncation& trunc,
                                             Sector sector);

// Parity exp(i pi (a'a + S^z)) on the ResonantCollective basis: diagonal
// +-1, +1 where n + s is even with s = 0 for the up-up component and
// s = 1 for down-down.
RealSymmetricMatrix parity_operator(const FockTruncation& trunc);

// Spin-swap permutation on the Full basis (either frame): exchanges the
// two mixed spin-pair blocks, fixes the aligned ones.
RealSymmetricMatrix exchange_operator(const FockTruncation& trunc);

// max norm of [A, B]; both operands must have equal dimension.
double commutator_max_norm(const RealSymmetricMatrix& a,
                           const RealSymmetricMatrix& b);

// Builds H_d + F_1 + F_2 (the dipolar expansion plus the two engineered
// single-ion Stark shifts) and the target coupling g s1z s2z (a + a') on
// the truncated space and returns the max-norm difference. Exact operator
// algebra; anything above rounding noise indicates an assembly bug.
double verify_tripartite_reduction(double g_value, const FockTruncation& trunc);

// Residuals of the two-ion effective-Hamiltonian assembly, on the product
// space (breathing ladder) (x) (c.m. ladder) (x) (two spins).
struct AppendixReport {
  // breathing-mode spin parts vs -g(a+a')(s1z+s2z+1)
  double breathing_residual = 0.0;
  // c.m. coupling vs g*3^(1/4)(a_cm+a_cm')(s2z-s1z)
  double cm_residual = 0.0;
  // single-spin terms vs the re-derived -g(s1x+s2x)
  double single_spin_derived_residual = 0.0;
  // single-spin terms vs the as-printed -g(s1z+s2x); nonzero by design,
  // kept for the record (the two readings differ by a bounded operator)
  double single_spin_printed_residual = 0.0;
  // max entry of the eta-dependent constant term, halves when eta doubles
  double constant_term_max = 0.0;
};

// Returns max(breathing_residual, cm_residual); the full breakdown is
// written to *report when given.
double verify_appendix_assembly(double g_value, double eta,
                                const FockTruncation& trunc,
                                AppendixReport* report = nullptr);

}  // namespace tqr

#endif
