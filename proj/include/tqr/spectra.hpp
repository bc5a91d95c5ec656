#ifndef TQR_SPECTRA_HPP
#define TQR_SPECTRA_HPP

#include <optional>
#include <vector>

#include "tqr/model.hpp"

// Dense real-symmetric eigensolving (Householder tridiagonalization plus
// implicit-shift QL), convergence-controlled ground states, spectral
// sweeps over g, and the partial trace onto the phonon.

namespace tqr {

struct EigenSystem {
  // Eigenvalues ascending; vectors[j] is the eigenvector of values[j],
  // stored contiguously (vectors[j*dim + i] = component i).
  std::vector<double> values;
  std::vector<double> vectors;
  int dim = 0;

  const double* vector(int j) const { return vectors.data() + std::size_t(j) * dim; }
};

// Full eigensystem, or the lowest k pairs when k is given.
// Throws Error(NonConvergence) if the QL iteration budget is exhausted;
// the message names the failing tridiagonal block.
EigenSystem eigensolve(const RealSymmetricMatrix& h,
                       std::optional<int> k = std::nullopt);

// Eigenvalues only (skips accumulating the orthogonal transform).
std::vector<double> eigenvalues(const RealSymmetricMatrix& h);

struct GroundState {
  double energy = 0.0;
  std::vector<double> vector;  // sector basis, spin-major
  int n_max_used = 0;
};

inline constexpr int kTruncationCap = 4096;

// Re-solves with n_max *= growth_factor until successive ground energies
// agree to trunc.tol * omega. Throws Error(TruncationCeiling) past the cap.
GroundState converged_ground_state(const ModelParams& params,
                                   const FockTruncation& trunc,
                                   Sector sector);

struct SweepRow {
  double g = 0.0;
  std::vector<double> values;  // lowest k eigenvalues
};

// k lowest eigenvalues per grid point; rows are independent and may be
// computed by a worker pool, but are always returned in grid order.
std::vector<SweepRow> spectrum_sweep(const ModelParams& params_base,
                                     const std::vector<double>& g_grid,
                                     const FockTruncation& trunc,
                                     Sector sector, int k, int threads = 1);

struct PhononDensityMatrix {
  int n_max = 0;
  std::vector<double> entries;  // (n_max+1)^2 row-major, symmetric

  double& at(int m, int n) { return entries[std::size_t(m) * (n_max + 1) + n]; }
  double at(int m, int n) const { return entries[std::size_t(m) * (n_max + 1) + n]; }
};

// rho_b[m][n] = sum_s psi[s,m] psi[s,n] over the spin-major input layout;
// the spin dimension is inferred from the vector length. Rejects inputs
// with | ||psi|| - 1 | > 1e-8. Note the parity half-sectors interleave
// spin with n; embed them into the collective basis first (below).
PhononDensityMatrix partial_trace_phonon(const std::vector<double>& psi,
                                         const FockTruncation& trunc);

// Lifts a ResonantPlus/Minus vector into the 2(n_max+1) collective basis.
std::vector<double> embed_parity_vector(const std::vector<double>& psi,
                                        Sector sector);

}  // namespace tqr

#endif
