#ifndef TQR_GFUNCTION_HPP
#define TQR_GFUNCTION_HPP

#include <optional>
#include <vector>

#include "tqr/model.hpp"
#include "tqr/spectra.hpp"

// Displaced-operator recursion solver for the detuned triplet sector.
// The eigenstate is expanded twice, in the A = a + g/w and B = a - g/w
// displaced ladders; matching the two expansions yields a cross-ratio
// function G(E) whose zeros are the regular triplet eigenenergies. The
// singlet sector is exactly solvable and handled in closed form.

namespace tqr {

struct SeriesCoefficients {
  // Index m runs 0..M. True coefficients are these times exp(log_scale);
  // the scale is shared by all three arrays (and, for a B side, includes
  // the A-side scale it was seeded from).
  std::vector<double> c, d, e;
  double log_scale = 0.0;
};

struct GPolicy {
  int fixed_M = 0;          // > 0 pins the series length; 0 = adaptive
  int cap = 400;            // adaptive ceiling
  double rel_tol = 1e-12;   // term-to-sum ratio that counts as converged
  int run_length = 5;       // consecutive small terms required, per sum
  double pole_guard = 1e-4; // exclusion radius around poles, units of omega
};

struct GEvaluation {
  double E = 0.0;
  double value = 0.0;
  double nearest_pole_distance = 0.0;
  int M_used = 0;
};

enum class RootStatus {
  Accepted,             // bracketed, bisected, proportionality-checked
  ExceptionalCandidate, // sign change inside a pole guard band; defer to ED
};

struct RootRecord {
  double E = 0.0;
  Sector sector = Sector::TripletRotated;
  double residual_G = 0.0;
  std::optional<double> ed_match;  // distance to nearest ED level, if asked
  RootStatus status = RootStatus::Accepted;
  // cosine similarity of the two reconstructed expansions (NaN for
  // exceptional candidates, which are never reconstructed)
  double proportionality = 0.0;
};

// Pole families of G: E = w m - g^2/w and E = w m - g^2/w +- 2 eps.
std::vector<double> pole_locations(const ModelParams& params, double e_min,
                                   double e_max);

// A-side arrays up to index M: d_0 = 1, d_1 = C_0, then the three-term
// recursion m d_m = C_{m-1} d_{m-1} - d_{m-2}, with the c/e closures.
// Throws PoleProximity (offending m in the message) and ZeroCoupling.
SeriesCoefficients a_side_coefficients(double E, const ModelParams& params,
                                       int M, double pole_guard = 1e-4);

// B-side arrays seeded from the A-side overlap sums; shares (and extends)
// the A-side log_scale. Throws SeedUnderflow if both seeds underflow.
SeriesCoefficients b_side_coefficients(double E, const ModelParams& params,
                                       int M,
                                       const SeriesCoefficients& a_side,
                                       double pole_guard = 1e-4);

// The cross-ratio G(E) with adaptive series length: extends M until five
// consecutive terms of every one of the four weighted sums drop below
// rel_tol of that sum's scale, or the cap is hit (NonConvergentSeries).
GEvaluation g_function(double E, const ModelParams& params,
                       const GPolicy& policy = {});

// Both expansions materialized in the bare Fock basis (3 spin components
// x (n_max+1) amplitudes, spin-major) at trial energy E, each truncated
// where its own recursion loses accuracy, plus their cosine similarity.
// At an eigenvalue the two are parallel; away from one they are not.
struct Reconstruction {
  std::vector<double> a_amplitudes;
  std::vector<double> b_amplitudes;
  double cosine_similarity = 0.0;
};

Reconstruction reconstruct_wavefunctions(double E, const ModelParams& params,
                                         int M, int n_max);

// Scans [e_min, e_max] at scan_step, skipping pole guard bands, brackets
// sign changes, bisects to root_tol, and validates each candidate by the
// proportionality check (spurious cross-ratio zeros are dropped). Sign
// changes that straddle a guard band are flagged ExceptionalCandidate.
// When trunc_for_oracle is given, each record carries the distance to the
// nearest ED triplet level at that truncation.
std::vector<RootRecord> find_roots(
    const ModelParams& params, double e_min, double e_max,
    double scan_step = 1e-3, double root_tol = 1e-9,
    const std::optional<FockTruncation>& trunc_for_oracle = std::nullopt,
    const GPolicy& policy = {}, int threads = 1);

// E_-(n) = n w - g^2/w for 0 <= n < n_count.
std::vector<double> singlet_energies(const ModelParams& params, int n_count);

}  // namespace tqr

#endif
