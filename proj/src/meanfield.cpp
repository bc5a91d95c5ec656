#include "tqr/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace tqr {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, msg);
}

// Lowest eigenvalue of the symmetric 3x3 triplet block
//   [[2 eps + x, s, 0], [s, -x, s], [0, s, -2 eps + x]],
// s = sqrt(2) W, x = 2 g alpha, by the trigonometric cubic formula.
double triplet_min_eigenvalue(double eps, double s, double x) {
  const double a00 = 2.0 * eps + x, a11 = -x, a22 = -2.0 * eps + x;
  const double m = (a00 + a11 + a22) / 3.0;
  const double b00 = a00 - m, b11 = a11 - m, b22 = a22 - m;
  const double p2 = (b00 * b00 + b11 * b11 + b22 * b22 + 4.0 * s * s) / 6.0;
  const double p = std::sqrt(p2);
  if (p == 0.0) return m;
  // det B with the two zero corners
  const double det = b00 * (b11 * b22 - s * s) - s * (s * b22);
  double q = det / (2.0 * p2 * p);
  q = std::clamp(q, -1.0, 1.0);
  const double phi = std::acos(q) / 3.0;
  return m + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
}

double spin_minimum(double alpha, const ModelParams& params) {
  const double x = 2.0 * params.g * alpha;
  if (params.epsilon == 0.0)
    return -2.0 * std::sqrt(params.g * params.g * alpha * alpha +
                            params.Omega * params.Omega);
  const double triplet =
      triplet_min_eigenvalue(params.epsilon, std::sqrt(2.0) * params.Omega, x);
  return std::min(triplet, -x);  // -x is the singlet level
}

double golden_refine(const ModelParams& params, double a, double b, double c,
                     double tol) {
  const double R = 0.6180339887498949, C = 1.0 - R;
  double x0 = a, x3 = c, x1, x2;
  if (c - b > b - a) {
    x1 = b;
    x2 = b + C * (c - b);
  } else {
    x2 = b;
    x1 = b - C * (b - a);
  }
  double f1 = energy_functional(x1, params);
  double f2 = energy_functional(x2, params);
  while (x3 - x0 > tol) {
    if (f2 < f1) {
      x0 = x1;
      x1 = x2;
      f1 = f2;
      x2 = R * x2 + C * x3;
      f2 = energy_functional(x2, params);
    } else {
      x3 = x2;
      x2 = x1;
      f2 = f1;
      x1 = R * x1 + C * x0;
      f1 = energy_functional(x1, params);
    }
  }
  return f1 < f2 ? x1 : x2;
}

}  // namespace

double energy_functional(double alpha, const ModelParams& params) {
  require(std::isfinite(alpha), "alpha must be finite");
  validate(params);
  return params.omega * alpha * alpha + spin_minimum(alpha, params);
}

MeanFieldResult minimize_alpha(const ModelParams& params) {
  validate(params);

  const double span = 2.0 * std::fabs(params.g) / params.omega + 2.0;
  const double step = 1e-2;
  const int count = static_cast<int>(std::ceil(2.0 * span / step));
  int best = 0;
  double best_f = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= count; ++k) {
    const double a = -span + step * k;
    const double f = energy_functional(a, params);
    if (f < best_f) {
      best_f = f;
      best = k;
    }
  }
  const int mid = std::clamp(best, 1, count - 1);
  double alpha = golden_refine(params, -span + step * (mid - 1),
                               -span + step * mid, -span + step * (mid + 1),
                               1e-12);

  MeanFieldResult out;
  if (params.epsilon == 0.0) {
    // Snap to the closed forms: alpha = 0 below the critical coupling,
    // the degenerate +-alpha_0 pair above it (canonical sign +).
    const double g_c = std::sqrt(params.omega * params.Omega);
    const double g_abs = std::fabs(params.g);
    if (g_abs <= g_c) {
      out.alpha_star = 0.0;
      out.branch = Branch::Subradiant;
    } else {
      const double a0sq = params.g * params.g / (params.omega * params.omega) -
                          params.Omega * params.Omega / (params.g * params.g);
      out.alpha_star = std::sqrt(std::max(a0sq, 0.0));
      out.branch = Branch::SuperradiantPlus;
      out.degenerate_pair = out.alpha_star != 0.0;
    }
  } else {
    out.alpha_star = alpha;
    out.branch = Branch::DetunedUnique;
  }
  out.energy = energy_functional(out.alpha_star, params);
  return out;
}

MeanFieldResult mirror(const MeanFieldResult& result) {
  MeanFieldResult out = result;
  out.alpha_star = -result.alpha_star;
  if (result.branch == Branch::SuperradiantPlus)
    out.branch = Branch::SuperradiantMinus;
  else if (result.branch == Branch::SuperradiantMinus)
    out.branch = Branch::SuperradiantPlus;
  return out;
}

GroundCurve ground_energy_curve(const ModelParams& params_base,
                                const std::vector<double>& g_grid) {
  validate(params_base);
  require(g_grid.size() >= 3, "ground_energy_curve: need at least 3 points");
  const double h = g_grid[1] - g_grid[0];
  require(h > 0.0, "ground_energy_curve: grid must be ascending");
  for (std::size_t i = 1; i + 1 < g_grid.size(); ++i)
    require(std::fabs(g_grid[i + 1] - g_grid[i] - h) <= 1e-9 * std::fabs(h),
            "ground_energy_curve: grid must be uniform");

  const int n = static_cast<int>(g_grid.size());
  GroundCurve curve;
  curve.points.resize(n);
  for (int i = 0; i < n; ++i) {
    ModelParams p = params_base;
    p.g = g_grid[i];
    curve.points[i].g = g_grid[i];
    curve.points[i].energy = minimize_alpha(p).energy;
  }

  auto& pts = curve.points;
  for (int i = 1; i + 1 < n; ++i) {
    pts[i].dE_dg = (pts[i + 1].energy - pts[i - 1].energy) / (2.0 * h);
    pts[i].d2E_dg2 =
        (pts[i + 1].energy - 2.0 * pts[i].energy + pts[i - 1].energy) /
        (h * h);
  }
  pts[0].dE_dg =
      (-3.0 * pts[0].energy + 4.0 * pts[1].energy - pts[2].energy) / (2.0 * h);
  pts[n - 1].dE_dg = (3.0 * pts[n - 1].energy - 4.0 * pts[n - 2].energy +
                      pts[n - 3].energy) /
                     (2.0 * h);
  pts[0].d2E_dg2 = (pts[0].energy - 2.0 * pts[1].energy + pts[2].energy) /
                   (h * h);
  pts[n - 1].d2E_dg2 = (pts[n - 3].energy - 2.0 * pts[n - 2].energy +
                        pts[n - 1].energy) /
                       (h * h);

  curve.kink_index = -1;
  curve.kink_jump = 0.0;
  for (int i = 1; i + 2 < n; ++i) {
    const double jump = std::fabs(pts[i + 1].d2E_dg2 - pts[i].d2E_dg2);
    if (jump > curve.kink_jump) {
      curve.kink_jump = jump;
      curve.kink_index = i;
    }
  }
  return curve;
}

}  // namespace tqr
