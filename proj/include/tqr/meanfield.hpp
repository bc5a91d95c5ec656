#ifndef TQR_MEANFIELD_HPP
#define TQR_MEANFIELD_HPP

#include <vector>

#include "tqr/model.hpp"

// Mean-field ground-state analysis: the energy functional over a real
// coherent amplitude alpha, its global minimum, and derivative-based
// transition diagnostics along a g grid.

namespace tqr {

enum class Branch {
  Subradiant,        // resonant, alpha* = 0
  SuperradiantPlus,  // resonant, canonical +alpha_0 of the degenerate pair
  SuperradiantMinus, // the mirror partner (returned by mirror())
  DetunedUnique,     // eps != 0, single minimum
};

struct MeanFieldResult {
  double alpha_star = 0.0;
  double energy = 0.0;
  Branch branch = Branch::Subradiant;
  // Resonant superradiant minima come in +-alpha_0 pairs; the canonical
  // representative is +alpha_0 and this flag records the degeneracy.
  bool degenerate_pair = false;
};

// E(alpha) = w alpha^2 + lambda_min[ W(s1x+s2x) + eps(s1z+s2z)
//                                    + 2 g alpha s1z s2z ],
// the spin minimum taken in closed form (singlet level and analytic
// 3x3 triplet diagonalization). At eps = 0 this reduces to
// w alpha^2 - 2 sqrt(g^2 alpha^2 + W^2).
double energy_functional(double alpha, const ModelParams& params);

// Global minimum over real alpha: bracketed scan on +-(2|g|/w + 2) at
// step 1e-2, then golden-section refinement to 1e-12. The resonant case
// is cross-checked against the closed forms alpha = 0 (g <= g_c) and
// +-alpha_0, alpha_0 = sqrt(g^2/w^2 - W^2/g^2), g_c = sqrt(w W).
MeanFieldResult minimize_alpha(const ModelParams& params);

// The -alpha partner of a degenerate superradiant result.
MeanFieldResult mirror(const MeanFieldResult& result);

struct CurvePoint {
  double g = 0.0;
  double energy = 0.0;
  double dE_dg = 0.0;
  double d2E_dg2 = 0.0;
};

struct GroundCurve {
  std::vector<CurvePoint> points;
  // Grid cell with the largest jump of d2E/dg2 (the transition locus at
  // resonance; at eps != 0 the jump decays under grid refinement).
  int kink_index = 0;
  double kink_jump = 0.0;
};

// Mean-field ground energy and central-difference derivatives on a
// uniform g grid (one-sided at the ends).
GroundCurve ground_energy_curve(const ModelParams& params_base,
                                const std::vector<double>& g_grid);

}  // namespace tqr

#endif
