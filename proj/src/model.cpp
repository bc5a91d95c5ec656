#include "tqr/model.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace tqr {

namespace {

// Pauli-z eigenvalues over the spin-major pair basis
// |up,up>, |up,dn>, |dn,up>, |dn,dn> (or the rotated labels).
constexpr double kZ1[4] = {1.0, 1.0, -1.0, -1.0};
constexpr double kZ2[4] = {1.0, -1.0, 1.0, -1.0};

// sigma_x on spin 1 maps pair s to kX1[s]; likewise spin 2.
constexpr int kX1[4] = {2, 3, 0, 1};
constexpr int kX2[4] = {1, 0, 3, 2};

void require(bool ok, const char* msg) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, msg);
}

}  // namespace

void validate(const ModelParams& params) {
  require(std::isfinite(params.omega) && std::isfinite(params.Omega) &&
              std::isfinite(params.epsilon) && std::isfinite(params.g),
          "model parameters must be finite");
  require(params.omega > 0.0, "omega must be positive");
  require(params.Omega >= 0.0, "Omega must be non-negative");
}

void validate(const FockTruncation& trunc) {
  require(trunc.n_max >= 1, "n_max must be at least 1");
  require(trunc.growth_factor >= 2, "growth_factor must be at least 2");
  require(trunc.tol > 0.0, "truncation tolerance must be positive");
}

int spin_dimension(Sector sector) noexcept {
  switch (sector) {
    case Sector::Full: return 4;
    case Sector::TripletRotated: return 3;
    case Sector::SingletRotated: return 1;
    case Sector::ResonantCollective: return 2;
    case Sector::ResonantPlus: return 1;
    case Sector::ResonantMinus: return 1;
  }
  return 0;
}

const char* sector_name(Sector sector) noexcept {
  switch (sector) {
    case Sector::Full: return "Full";
    case Sector::TripletRotated: return "TripletRotated";
    case Sector::SingletRotated: return "SingletRotated";
    case Sector::ResonantCollective: return "ResonantCollective";
    case Sector::ResonantPlus: return "ResonantPlus";
    case Sector::ResonantMinus: return "ResonantMinus";
  }
  return "?";
}

double RealSymmetricMatrix::max_asymmetry() const noexcept {
  double worst = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) {
      double a = at(i, j), b = at(j, i);
      double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
      double rel = std::fabs(a - b) / scale;
      if (rel > worst) worst = rel;
    }
  return worst;
}

RealSymmetricMatrix build_hamiltonian(const ModelParams& params,
                                      const FockTruncation& trunc,
                                      Frame frame) {
  validate(params);
  validate(trunc);
  const int nph = trunc.n_max + 1;
  RealSymmetricMatrix h(4 * nph);

  auto idx = [nph](int s, int n) { return s * nph + n; };

  for (int s = 0; s < 4; ++s) {
    for (int n = 0; n < nph; ++n) {
      const int i = idx(s, n);
      if (frame == Frame::Original) {
        // w n + eps(s1z + s2z) on the diagonal; W(s1x + s2x) hops spins;
        // g(a + a') s1z s2z couples the ladder.
        h.at(i, i) += params.omega * n + params.epsilon * (kZ1[s] + kZ2[s]);
        h.at(i, idx(kX1[s], n)) += params.Omega;
        h.at(i, idx(kX2[s], n)) += params.Omega;
        if (n + 1 < nph) {
          const double x = params.g * std::sqrt(n + 1.0) * kZ1[s] * kZ2[s];
          h.at(idx(s, n + 1), i) += x;
          h.at(i, idx(s, n + 1)) += x;
        }
      } else {
        // pi/2 rotation about both sigma-y axes: W moves to the diagonal
        // with a sign flip, eps hops spins, the coupling becomes
        // g s1x s2x (a + a').
        h.at(i, i) += params.omega * n - params.Omega * (kZ1[s] + kZ2[s]);
        h.at(i, idx(kX1[s], n)) += params.epsilon;
        h.at(i, idx(kX2[s], n)) += params.epsilon;
        if (n + 1 < nph) {
          const int t = kX1[kX2[s]];  // both spins flipped
          const double x = params.g * std::sqrt(n + 1.0);
          h.at(idx(t, n + 1), i) += x;
          h.at(i, idx(t, n + 1)) += x;
        }
      }
    }
  }
  return h;
}

RealSymmetricMatrix build_sector_hamiltonian(const ModelParams& params,
                                             const FockTruncation& trunc,
                                             Sector sector) {
  validate(params);
  validate(trunc);
  const bool resonant_sector = sector == Sector::ResonantCollective ||
                               sector == Sector::ResonantPlus ||
                               sector == Sector::ResonantMinus;
  if (resonant_sector && params.epsilon != 0.0)
    throw Error(ErrorCode::SectorUnavailable,
                std::string(sector_name(sector)) +
                    " requires epsilon = 0 (got epsilon != 0)");

  const int nph = trunc.n_max + 1;
  const double w = params.omega, W = params.Omega, eps = params.epsilon,
               g = params.g;

  switch (sector) {
    case Sector::Full:
      return build_hamiltonian(params, trunc, Frame::Original);

    case Sector::TripletRotated: {
      // Rotated exchange-symmetric block over {up-up, (ud+du)/sqrt2,
      // dn-dn}: diagonal w n -+ 2W, sqrt(2) eps ladder between rows,
      // coupling g(a+a') between the aligned rows and on the middle one.
      RealSymmetricMatrix h(3 * nph);
      auto idx = [nph](int s, int n) { return s * nph + n; };
      for (int n = 0; n < nph; ++n) {
        h.at(idx(0, n), idx(0, n)) = w * n - 2.0 * W;
        h.at(idx(1, n), idx(1, n)) = w * n;
        h.at(idx(2, n), idx(2, n)) = w * n + 2.0 * W;
        const double se = std::sqrt(2.0) * eps;
        h.at(idx(0, n), idx(1, n)) = se;
        h.at(idx(1, n), idx(0, n)) = se;
        h.at(idx(1, n), idx(2, n)) = se;
        h.at(idx(2, n), idx(1, n)) = se;
        if (n + 1 < nph) {
          const double x = g * std::sqrt(n + 1.0);
          h.at(idx(0, n + 1), idx(2, n)) = x;
          h.at(idx(2, n), idx(0, n + 1)) = x;
          h.at(idx(2, n + 1), idx(0, n)) = x;
          h.at(idx(0, n), idx(2, n + 1)) = x;
          h.at(idx(1, n + 1), idx(1, n)) = x;
          h.at(idx(1, n), idx(1, n + 1)) = x;
        }
      }
      return h;
    }

    case Sector::SingletRotated: {
      // The antisymmetric spin state sees w n - g(a+a') only; its
      // spectrum is the displaced ladder n w - g^2/w.
      RealSymmetricMatrix h(nph);
      for (int n = 0; n < nph; ++n) {
        h.at(n, n) = w * n;
        if (n + 1 < nph) {
          const double x = -g * std::sqrt(n + 1.0);
          h.at(n + 1, n) = x;
          h.at(n, n + 1) = x;
        }
      }
      return h;
    }

    case Sector::ResonantCollective: {
      // {up-up, dn-dn} block at eps = 0: diag w n -+ 2W, coupling
      // g(a+a') between the two spin components.
      RealSymmetricMatrix h(2 * nph);
      auto idx = [nph](int s, int n) { return s * nph + n; };
      for (int n = 0; n < nph; ++n) {
        h.at(idx(0, n), idx(0, n)) = w * n - 2.0 * W;
        h.at(idx(1, n), idx(1, n)) = w * n + 2.0 * W;
        if (n + 1 < nph) {
          const double x = g * std::sqrt(n + 1.0);
          h.at(idx(0, n + 1), idx(1, n)) = x;
          h.at(idx(1, n), idx(0, n + 1)) = x;
          h.at(idx(1, n + 1), idx(0, n)) = x;
          h.at(idx(0, n), idx(1, n + 1)) = x;
        }
      }
      return h;
    }

    case Sector::ResonantPlus:
    case Sector::ResonantMinus: {
      // Parity-resolved halves of the collective block. In the even
      // (Plus) sector the spin at phonon number n is up-up for even n;
      // in the odd sector the roles swap. Both are tridiagonal.
      RealSymmetricMatrix h(nph);
      const double sign = sector == Sector::ResonantPlus ? -1.0 : 1.0;
      for (int n = 0; n < nph; ++n) {
        const double flip = (n % 2 == 0) ? 1.0 : -1.0;
        h.at(n, n) = w * n + sign * flip * 2.0 * W;
        if (n + 1 < nph) {
          const double x = g * std::sqrt(n + 1.0);
          h.at(n + 1, n) = x;
          h.at(n, n + 1) = x;
        }
      }
      return h;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown sector");
}

RealSymmetricMatrix parity_operator(const FockTruncation& trunc) {
  validate(trunc);
  const int nph = trunc.n_max + 1;
  RealSymmetricMatrix p(2 * nph);
  for (int s = 0; s < 2; ++s)
    for (int n = 0; n < nph; ++n)
      p.at(s * nph + n, s * nph + n) = ((n + s) % 2 == 0) ? 1.0 : -1.0;
  return p;
}

RealSymmetricMatrix exchange_operator(const FockTruncation& trunc) {
  validate(trunc);
  const int nph = trunc.n_max + 1;
  RealSymmetricMatrix p(4 * nph);
  for (int n = 0; n < nph; ++n) {
    p.at(0 * nph + n, 0 * nph + n) = 1.0;
    p.at(3 * nph + n, 3 * nph + n) = 1.0;
    p.at(1 * nph + n, 2 * nph + n) = 1.0;
    p.at(2 * nph + n, 1 * nph + n) = 1.0;
  }
  return p;
}

double commutator_max_norm(const RealSymmetricMatrix& a,
                           const RealSymmetricMatrix& b) {
  const int n = a.dim();
  if (b.dim() != n)
    throw Error(ErrorCode::InvalidArgument, "commutator: dimension mismatch");
  std::vector<double> ab(std::size_t(n) * n, 0.0), ba(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = a.at(i, k);
      const double bik = b.at(i, k);
      if (aik != 0.0)
        for (int j = 0; j < n; ++j) ab[std::size_t(i) * n + j] += aik * b.at(k, j);
      if (bik != 0.0)
        for (int j = 0; j < n; ++j) ba[std::size_t(i) * n + j] += bik * a.at(k, j);
    }
  double worst = 0.0;
  for (std::size_t i = 0; i < ab.size(); ++i)
    worst = std::max(worst, std::fabs(ab[i] - ba[i]));
  return worst;
}

namespace {

// Dense long-double workspace for the operator-identity checks. The
// extended precision keeps coefficient roundoff below the 1e-14 contract
// even at |g| = 100 while the two sides stay independently assembled.
struct LongMatrix {
  int dim;
  std::vector<long double> a;
  explicit LongMatrix(int d) : dim(d), a(std::size_t(d) * d, 0.0L) {}
  long double& at(int i, int j) { return a[std::size_t(i) * dim + j]; }
};

double max_abs_diff(const LongMatrix& x, const LongMatrix& y) {
  long double worst = 0.0L;
  for (std::size_t i = 0; i < x.a.size(); ++i) {
    long double d = x.a[i] - y.a[i];
    if (d < 0) d = -d;
    if (d > worst) worst = d;
  }
  return static_cast<double>(worst);
}

double max_abs_entry(const LongMatrix& x) {
  long double worst = 0.0L;
  for (long double v : x.a) {
    if (v < 0) v = -v;
    if (v > worst) worst = v;
  }
  return static_cast<double>(worst);
}

}  // namespace

double verify_tripartite_reduction(double g_value,
                                   const FockTruncation& trunc) {
  if (!std::isfinite(g_value))
    throw Error(ErrorCode::InvalidArgument, "g must be finite");
  validate(trunc);
  const int nph = trunc.n_max + 1;
  const int dim = 4 * nph;
  const long double g = g_value;

  // Per-spin-pair coefficients of (a + a') in each piece:
  //   dipolar expansion  g (s1z s2z + s1z + s2z + 1)
  //   engineered shifts  -g (s_jz + 1/2), j = 1, 2
  //   target             g s1z s2z
  LongMatrix lhs(dim), rhs(dim);
  for (int s = 0; s < 4; ++s) {
    const long double z1 = kZ1[s], z2 = kZ2[s];
    const long double dipolar = g * (z1 * z2 + z1 + z2 + 1.0L);
    const long double f1 = -g * (z1 + 0.5L);
    const long double f2 = -g * (z2 + 0.5L);
    const long double target = g * z1 * z2;
    for (int n = 0; n + 1 < nph; ++n) {
      const long double x = sqrtl(static_cast<long double>(n) + 1.0L);
      const int i = s * nph + n, j = s * nph + n + 1;
      lhs.at(i, j) += dipolar * x;
      lhs.at(j, i) += dipolar * x;
      lhs.at(i, j) += f1 * x;
      lhs.at(j, i) += f1 * x;
      lhs.at(i, j) += f2 * x;
      lhs.at(j, i) += f2 * x;
      rhs.at(i, j) = target * x;
      rhs.at(j, i) = target * x;
    }
  }
  return max_abs_diff(lhs, rhs);
}

double verify_appendix_assembly(double g_value, double eta,
                                const FockTruncation& trunc,
                                AppendixReport* report) {
  if (!std::isfinite(g_value) || !std::isfinite(eta))
    throw Error(ErrorCode::InvalidArgument, "g and eta must be finite");
  require(eta > 0.0, "eta must be positive");
  validate(trunc);

  // Product space: (breathing ladder) (x) (c.m. ladder) (x) (two spins),
  // spin-major, then c.m., then breathing.
  const int nb = trunc.n_max + 1;
  const int nc = trunc.n_max + 1;
  const int dim = 4 * nc * nb;
  const long double g = g_value;
  const long double root3_4 = sqrtl(sqrtl(3.0L));  // 3^(1/4)

  auto idx = [nb, nc](int s, int q, int n) { return (s * nc + q) * nb + n; };

  // Single-ion pieces, assembled term by term as printed (the c.m. sign
  // of ion 1 follows the combined two-ion form, which fixes it as the
  // opposite of ion 2's; see the assembly checks below).
  LongMatrix breathing_sum(dim), cm_sum(dim), spin_sum(dim), const_sum(dim);
  for (int s = 0; s < 4; ++s) {
    const long double z[2] = {kZ1[s], kZ2[s]};
    const int xs[2] = {kX1[s], kX2[s]};
    for (int q = 0; q < nc; ++q) {
      for (int n = 0; n < nb; ++n) {
        const int i = idx(s, q, n);
        for (int j = 0; j < 2; ++j) {
          // -g (a + a')(s_jz + 1/2)
          if (n + 1 < nb) {
            const long double x = sqrtl(static_cast<long double>(n) + 1.0L);
            const long double v = -g * (z[j] + 0.5L) * x;
            breathing_sum.at(i, idx(s, q, n + 1)) += v;
            breathing_sum.at(idx(s, q, n + 1), i) += v;
          }
          // +- g 3^(1/4) (a_cm + a_cm')(s_jz + 1/2); ion 1 carries the
          // minus so the pair sums to the (s2z - s1z) coupling
          if (q + 1 < nc) {
            const long double xc = sqrtl(static_cast<long double>(q) + 1.0L);
            const long double sgn = (j == 0) ? -1.0L : 1.0L;
            const long double v = sgn * g * root3_4 * (z[j] + 0.5L) * xc;
            cm_sum.at(i, idx(s, q + 1, n)) += v;
            cm_sum.at(idx(s, q + 1, n), i) += v;
          }
          // -g s_jx
          spin_sum.at(i, idx(xs[j], q, n)) += -g;
          // -(g / (2 sqrt(2) eta)) (s_jz + 2)
          const_sum.at(i, i) += -g / (2.0L * sqrtl(2.0L) * (long double)eta) *
                                (z[j] + 2.0L);
        }
      }
    }
  }

  // Check (i): breathing parts vs -g (a + a')(s1z + s2z + 1).
  LongMatrix breathing_target(dim);
  for (int s = 0; s < 4; ++s) {
    const long double coeff = -g * (kZ1[s] + kZ2[s] + 1.0L);
    for (int q = 0; q < nc; ++q)
      for (int n = 0; n + 1 < nb; ++n) {
        const long double x = sqrtl(static_cast<long double>(n) + 1.0L);
        breathing_target.at(idx(s, q, n), idx(s, q, n + 1)) = coeff * x;
        breathing_target.at(idx(s, q, n + 1), idx(s, q, n)) = coeff * x;
      }
  }

  // Check (ii): c.m. parts vs g 3^(1/4) (a_cm + a_cm')(s2z - s1z).
  LongMatrix cm_target(dim);
  for (int s = 0; s < 4; ++s) {
    const long double coeff = g * root3_4 * (kZ2[s] - kZ1[s]);
    for (int q = 0; q + 1 < nc; ++q) {
      const long double xc = sqrtl(static_cast<long double>(q) + 1.0L);
      for (int n = 0; n < nb; ++n) {
        cm_target.at(idx(s, q, n), idx(s, q + 1, n)) = coeff * xc;
        cm_target.at(idx(s, q + 1, n), idx(s, q, n)) = coeff * xc;
      }
    }
  }

  // Single-spin terms: the re-derived reading -g(s1x + s2x) and the
  // as-printed -g(s1z + s2x); both residuals are reported.
  LongMatrix spin_derived(dim), spin_printed(dim);
  for (int s = 0; s < 4; ++s)
    for (int q = 0; q < nc; ++q)
      for (int n = 0; n < nb; ++n) {
        const int i = idx(s, q, n);
        spin_derived.at(i, idx(kX1[s], q, n)) += -g;
        spin_derived.at(i, idx(kX2[s], q, n)) += -g;
        spin_printed.at(i, i) += -g * (long double)kZ1[s];
        spin_printed.at(i, idx(kX2[s], q, n)) += -g;
      }

  AppendixReport rep;
  rep.breathing_residual = max_abs_diff(breathing_sum, breathing_target);
  rep.cm_residual = max_abs_diff(cm_sum, cm_target);
  rep.single_spin_derived_residual = max_abs_diff(spin_sum, spin_derived);
  rep.single_spin_printed_residual = max_abs_diff(spin_sum, spin_printed);
  rep.constant_term_max = max_abs_entry(const_sum);
  if (report) *report = rep;
  return std::max(rep.breathing_residual, rep.cm_residual);
}

}  // namespace tqr
