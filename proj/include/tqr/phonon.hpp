#ifndef TQR_PHONON_HPP
#define TQR_PHONON_HPP

#include <vector>

#include "tqr/spectra.hpp"

// Phonon-state tomography: reference states (coherent, cat, classical
// mixture), position density, Wigner function, Uhlmann-Jozsa fidelity,
// purity, and quadrature variances. Quadratures are dimensionless,
// X = (a + a')/sqrt(2), P = i(a' - a)/sqrt(2), vacuum variance 1/2.

namespace tqr {

struct ReferenceState {
  enum class Kind { Vacuum, Coherent, CatPlus, CatMinus, Mixture };
  Kind kind = Kind::Vacuum;
  double alpha = 0.0;  // displacement (alpha_0 for the cat/mixture kinds)
  int n_max = 120;
};

struct PhaseSpaceGrid {
  double x_min = -8.0, x_max = 8.0;
  double p_min = -8.0, p_max = 8.0;
  int nx = 161, np = 161;
};

// Fock amplitudes e^{-a^2/2} a^n / sqrt(n!), renormalized after the hard
// cutoff. The discarded tail mass is written to *tail_mass when given;
// callers that care should warn above 1e-10.
std::vector<double> coherent_state(double alpha, int n_max,
                                   double* tail_mass = nullptr);

// Density matrix of the reference state. CatPlus/CatMinus use the
// normalization 1/sqrt(2(1 +- e^{-2 a^2})); Mixture is the equal-weight
// classical mixture of |+a> and |-a>.
PhononDensityMatrix reference_density(const ReferenceState& ref);

// rho(x) = sum_mn rho_mn psi_m(x) psi_n(x), harmonic eigenfunctions psi_n
// evaluated by the stable upward Hermite-function recurrence.
std::vector<double> position_density(const PhononDensityMatrix& rho,
                                     const std::vector<double>& x_grid);

struct WignerResult {
  PhaseSpaceGrid grid;
  std::vector<double> values;  // row-major over (p rows, x columns)
  double integral = 0.0;       // trapezoid estimate of the total mass
  double min_value = 0.0;
  bool coarse_grid = false;    // set when a grid spacing exceeds 0.2

  double at(int ip, int ix) const { return values[std::size_t(ip) * grid.nx + ix]; }
};

// W(x,p) via the Fock-basis expansion in associated Laguerre polynomials,
// normalized so the phase-space integral is 1. Rows are dealt to a worker
// pool and merged in index order, so results are thread-count invariant.
WignerResult wigner(const PhononDensityMatrix& rho, const PhaseSpaceGrid& grid,
                    int threads = 1);

// Uhlmann-Jozsa fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, via two
// symmetric eigendecompositions. Eigenvalues in [-1e-10, 0) are clamped
// to zero; anything lower (or a trace off by more than 1e-8) throws
// Error(NotAState).
double fidelity(const PhononDensityMatrix& rho,
                const PhononDensityMatrix& sigma);

// tr rho^2
double purity(const PhononDensityMatrix& rho);

struct QuadratureStats {
  double mean_x = 0.0;
  double mean_p = 0.0;
  double var_x = 0.0;
  double var_p = 0.0;
};

QuadratureStats quadrature_variances(const PhononDensityMatrix& rho);

}  // namespace tqr

#endif
