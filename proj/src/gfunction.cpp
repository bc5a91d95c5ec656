#include "tqr/gfunction.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace tqr {

namespace {

constexpr double kRescaleHigh = 1e100;
constexpr double kRescaleLow = 1e-100;
constexpr int kRescaleStride = 16;

void require(bool ok, const char* msg) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, msg);
}

void check_recursion_inputs(const ModelParams& params, int M) {
  validate(params);
  if (params.g == 0.0)
    throw Error(ErrorCode::ZeroCoupling,
                "the displaced-ladder recursion needs g != 0; at g = 0 the "
                "spectrum is the bare one, use the sector solvers");
  require(M >= 1, "series length M must be >= 1");
}

// Scales stored[0..filled] of all three arrays by 1/s and folds s into
// log_scale whenever the recursion state leaves the safe magnitude window.
void maybe_rescale(SeriesCoefficients& sc, int filled, double state_mag) {
  if (state_mag == 0.0) return;
  if (state_mag < kRescaleHigh && state_mag > kRescaleLow) return;
  const double inv = 1.0 / state_mag;
  for (int i = 0; i <= filled; ++i) {
    sc.c[i] *= inv;
    sc.d[i] *= inv;
    sc.e[i] *= inv;
  }
  sc.log_scale += std::log(state_mag);
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::vector<double> pole_locations(const ModelParams& params, double e_min,
                                   double e_max) {
  validate(params);
  require(e_min <= e_max, "pole_locations: empty interval");
  std::vector<double> poles;
  if (params.Omega == 0.0) return poles;
  const double w = params.omega;
  const double shift = params.g * params.g / w;
  const double offsets[3] = {0.0, 2.0 * params.epsilon, -2.0 * params.epsilon};
  for (double off : offsets) {
    // w m - g^2/w + off >= e_min at the first kept m
    const long m0 = std::max(0L, std::lround(std::ceil((e_min + shift - off) / w)));
    for (long m = m0;; ++m) {
      const double p = w * static_cast<double>(m) - shift + off;
      if (p > e_max) break;
      if (p >= e_min) poles.push_back(p);
    }
  }
  std::sort(poles.begin(), poles.end());
  poles.erase(std::unique(poles.begin(), poles.end(),
                          [](double a, double b) {
                            return std::fabs(a - b) < 1e-12;
                          }),
              poles.end());
  return poles;
}

SeriesCoefficients a_side_coefficients(double E, const ModelParams& params,
                                       int M, double pole_guard) {
  check_recursion_inputs(params, M);
  require(std::isfinite(E), "trial energy must be finite");
  require(pole_guard > 0.0, "pole_guard must be positive");

  const double w = params.omega, W = params.Omega, eps = params.epsilon,
               g = params.g;
  const double shift = g * g / w;
  const double guard = pole_guard * w;

  // D_m = E - w m + g^2/w enters every c/e closure and the resolvent part
  // of C_m; both vanish with W, so the guard applies only when W != 0.
  auto D_of = [&](int m) { return E - w * m + shift; };
  if (W != 0.0) {
    for (int m = 0; m <= M; ++m) {
      const double D = D_of(m);
      if (std::fabs(D - 2.0 * eps) <= guard || std::fabs(D + 2.0 * eps) <= guard)
        throw Error(ErrorCode::PoleProximity,
                    "trial energy within pole guard of the m = " +
                        std::to_string(m) + " ladder resonance");
    }
  }

  SeriesCoefficients sc;
  sc.c.assign(M + 1, 0.0);
  sc.d.assign(M + 1, 0.0);
  sc.e.assign(M + 1, 0.0);

  const double s2W = std::sqrt(2.0) * W;
  auto close = [&](int m) {
    if (W == 0.0) return;
    const double D = D_of(m);
    sc.c[m] = s2W * sc.d[m] / (D - 2.0 * eps);
    sc.e[m] = s2W * sc.d[m] / (D + 2.0 * eps);
  };

  sc.d[0] = 1.0;
  close(0);
  for (int m = 1; m <= M; ++m) {
    const double Dp = D_of(m - 1);
    double resolvent = 0.0;
    if (W != 0.0)
      resolvent = 2.0 * W * W *
                  (1.0 / (Dp + 2.0 * eps) + 1.0 / (Dp - 2.0 * eps));
    const double C =
        (w * (m - 1) + 3.0 * shift - E + resolvent) / (2.0 * g);
    const double prev2 = m >= 2 ? sc.d[m - 2] : 0.0;
    sc.d[m] = (C * sc.d[m - 1] - prev2) / m;
    close(m);
    if (m % kRescaleStride == 0)
      maybe_rescale(sc, m, std::max(std::fabs(sc.d[m]), std::fabs(sc.d[m - 1])));
  }
  return sc;
}

SeriesCoefficients b_side_coefficients(double E, const ModelParams& params,
                                       int M,
                                       const SeriesCoefficients& a_side,
                                       double pole_guard) {
  check_recursion_inputs(params, M);
  require(std::isfinite(E), "trial energy must be finite");
  require(pole_guard > 0.0, "pole_guard must be positive");
  require(static_cast<int>(a_side.c.size()) >= M + 1 &&
              static_cast<int>(a_side.e.size()) >= M + 1,
          "A-side arrays shorter than requested M");

  const double w = params.omega, W = params.Omega, eps = params.epsilon,
               g = params.g;
  const double shift = g * g / w;
  const double guard = pole_guard * w;

  SeriesCoefficients sc;
  sc.c.assign(M + 1, 0.0);
  sc.d.assign(M + 1, 0.0);
  sc.e.assign(M + 1, 0.0);

  // The overlap prefactor exp(-2 g^2/w^2) lives in log space so large
  // displacements cannot underflow the seeds.
  const double log_prefactor = -2.0 * g * g / (w * w);

  if (W == 0.0) {
    // No spin mixing: the A side has c = e = 0, so both seeds vanish
    // identically and the whole B expansion is the zero solution.
    sc.log_scale = a_side.log_scale + log_prefactor;
    return sc;
  }

  for (int m = 0; m <= M; ++m) {
    if (std::fabs(E + shift - w * m) <= guard)
      throw Error(ErrorCode::PoleProximity,
                  "trial energy within pole guard of the m = " +
                      std::to_string(m) + " displaced-ladder level");
  }

  long double seed_c = 0.0L, seed_e = 0.0L, t = 1.0L;
  const long double ratio = 2.0L * g / w;
  for (int n = 0; n <= M; ++n) {
    seed_c += static_cast<long double>(a_side.c[n]) * t;
    seed_e += static_cast<long double>(a_side.e[n]) * t;
    t *= ratio;
  }
  const long double seed_mag =
      std::max(seed_c < 0 ? -seed_c : seed_c, seed_e < 0 ? -seed_e : seed_e);
  if (seed_mag == 0.0L)
    throw Error(ErrorCode::SeedUnderflow,
                "both displaced-basis overlap seeds vanished after rescaling");

  sc.log_scale = a_side.log_scale + log_prefactor +
                 static_cast<double>(logl(seed_mag));
  sc.c[0] = static_cast<double>(seed_c / seed_mag);
  sc.e[0] = static_cast<double>(seed_e / seed_mag);

  const double s2W = std::sqrt(2.0) * W;
  auto close_d = [&](int m) {
    sc.d[m] = s2W * (sc.c[m] + sc.e[m]) / (E + shift - w * m);
  };
  close_d(0);

  const double drive = W / (std::sqrt(2.0) * g);
  for (int m = 1; m <= M; ++m) {
    const double Cp = (w * (m - 1) + 3.0 * shift + 2.0 * eps - E) / (2.0 * g);
    const double Cm = (w * (m - 1) + 3.0 * shift - 2.0 * eps - E) / (2.0 * g);
    const double c2 = m >= 2 ? sc.c[m - 2] : 0.0;
    const double e2 = m >= 2 ? sc.e[m - 2] : 0.0;
    sc.c[m] = (drive * sc.d[m - 1] + Cp * sc.c[m - 1] - c2) / m;
    sc.e[m] = (drive * sc.d[m - 1] + Cm * sc.e[m - 1] - e2) / m;
    close_d(m);
    if (m % kRescaleStride == 0) {
      const double mag =
          std::max({std::fabs(sc.c[m]), std::fabs(sc.e[m]), std::fabs(sc.d[m]),
                    std::fabs(sc.c[m - 1]), std::fabs(sc.e[m - 1])});
      maybe_rescale(sc, m, mag);
    }
  }
  return sc;
}

GEvaluation g_function(double E, const ModelParams& params,
                       const GPolicy& policy) {
  require(policy.cap >= 1 && policy.rel_tol > 0.0 && policy.run_length >= 1,
          "malformed series policy");
  const int M = policy.fixed_M > 0 ? policy.fixed_M : policy.cap;

  SeriesCoefficients a = a_side_coefficients(E, params, M, policy.pole_guard);
  SeriesCoefficients b =
      b_side_coefficients(E, params, M, a, policy.pole_guard);

  const double ratio = params.g / params.omega;
  long double sum_ca = 0.0L, sum_ea = 0.0L, sum_cb = 0.0L, sum_eb = 0.0L;
  long double peak_ca = 0.0L, peak_ea = 0.0L, peak_cb = 0.0L, peak_eb = 0.0L;
  long double t = 1.0L;
  int small_run = 0;
  int m_used = M;
  bool converged = policy.fixed_M > 0;

  for (int n = 0; n <= M; ++n) {
    const long double tca = static_cast<long double>(a.c[n]) * t;
    const long double tea = static_cast<long double>(a.e[n]) * t;
    const long double tcb = static_cast<long double>(b.c[n]) * t;
    const long double teb = static_cast<long double>(b.e[n]) * t;
    sum_ca += tca;
    sum_ea += tea;
    sum_cb += tcb;
    sum_eb += teb;
    auto mag = [](long double x) { return x < 0 ? -x : x; };
    peak_ca = std::max(peak_ca, mag(tca));
    peak_ea = std::max(peak_ea, mag(tea));
    peak_cb = std::max(peak_cb, mag(tcb));
    peak_eb = std::max(peak_eb, mag(teb));
    t *= ratio;

    if (policy.fixed_M > 0) continue;
    auto small = [&](long double term, long double sum, long double peak) {
      const long double scale = std::max(mag(sum), peak);
      return mag(term) <= static_cast<long double>(policy.rel_tol) * scale;
    };
    if (small(tca, sum_ca, peak_ca) && small(tea, sum_ea, peak_ea) &&
        small(tcb, sum_cb, peak_cb) && small(teb, sum_eb, peak_eb))
      ++small_run;
    else
      small_run = 0;
    if (small_run >= policy.run_length) {
      m_used = n;
      converged = true;
      break;
    }
  }
  if (!converged)
    throw Error(ErrorCode::NonConvergentSeries,
                "series tail above threshold at cap M = " +
                    std::to_string(M) + " for E = " + std::to_string(E));

  GEvaluation out;
  out.E = E;
  out.value = static_cast<double>((sum_ca * sum_eb - sum_cb * sum_ea) *
                                  expl(static_cast<long double>(a.log_scale) +
                                       static_cast<long double>(b.log_scale)));
  out.M_used = m_used;

  // Diagnostic distance to the nearest member of any pole family.
  out.nearest_pole_distance = std::numeric_limits<double>::infinity();
  if (params.Omega != 0.0) {
    const double w = params.omega;
    const double shift = params.g * params.g / w;
    for (double off :
         {0.0, 2.0 * params.epsilon, -2.0 * params.epsilon}) {
      const double x = (E + shift - off) / w;
      for (long m :
           {std::max(0L, static_cast<long>(std::floor(x))),
            std::max(0L, static_cast<long>(std::ceil(x)))}) {
        const double p = w * static_cast<double>(m) - shift + off;
        out.nearest_pole_distance =
            std::min(out.nearest_pole_distance, std::fabs(E - p));
      }
    }
  }
  return out;
}

namespace {

// <n|D(alpha)|m> columns for m = 0..m_cut, n = 0..n_max, real alpha.
// Column 0 is the coherent state; the ladder steps columns upward.
std::vector<double> displaced_columns(double alpha, int n_max, int m_cut) {
  const int rows = n_max + 1;
  std::vector<double> T(std::size_t(rows) * (m_cut + 1), 0.0);
  T[0] = std::exp(-0.5 * alpha * alpha);
  for (int n = 1; n < rows; ++n)
    T[std::size_t(n) * (m_cut + 1)] =
        T[std::size_t(n - 1) * (m_cut + 1)] * alpha / std::sqrt(double(n));
  for (int m = 0; m < m_cut; ++m) {
    const double inv = 1.0 / std::sqrt(double(m + 1));
    for (int n = 0; n < rows; ++n) {
      const double up =
          n > 0 ? T[std::size_t(n - 1) * (m_cut + 1) + m] : 0.0;
      T[std::size_t(n) * (m_cut + 1) + m + 1] =
          (std::sqrt(double(n)) * up -
           alpha * T[std::size_t(n) * (m_cut + 1) + m]) *
          inv;
    }
  }
  return T;
}

// The factorial-weighted ladder amplitudes sqrt(m!) |coef_m| first decay
// and then blow up where the recursion runs out of accuracy; the usable
// range ends at the minimum. Floor of 8 keeps degenerate short series.
int usable_ladder_cut(const SeriesCoefficients& sc, int M) {
  int best = 8;
  double best_log = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= M; ++m) {
    const double mag = std::max({std::fabs(sc.c[m]), std::fabs(sc.d[m]),
                                 std::fabs(sc.e[m])});
    if (mag == 0.0) continue;
    const double lg = 0.5 * std::lgamma(double(m) + 1.0) + std::log(mag);
    if (lg < best_log) {
      best_log = lg;
      best = m;
    }
  }
  return std::min(std::max(best, 8), M);
}

void accumulate_side(const SeriesCoefficients& sc, int m_cut, double alpha,
                     bool alternate, int n_max, std::vector<double>& out) {
  const int rows = n_max + 1;
  const std::vector<double> T = displaced_columns(alpha, n_max, m_cut);
  out.assign(std::size_t(3) * rows, 0.0);
  const std::vector<double>* comps[3] = {&sc.c, &sc.d, &sc.e};
  for (int m = 0; m <= m_cut; ++m) {
    double weight = std::exp(0.5 * std::lgamma(double(m) + 1.0));
    if (alternate && m % 2 == 1) weight = -weight;
    for (int s = 0; s < 3; ++s) {
      const double amp = (*comps[s])[m] * weight;
      if (amp == 0.0) continue;
      for (int n = 0; n < rows; ++n)
        out[std::size_t(s) * rows + n] +=
            amp * T[std::size_t(n) * (m_cut + 1) + m];
    }
  }
  double norm2 = 0.0;
  for (double v : out) norm2 += v * v;
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : out) v *= inv;
  }
}

}  // namespace

Reconstruction reconstruct_wavefunctions(double E, const ModelParams& params,
                                         int M, int n_max) {
  require(n_max >= 1, "n_max must be >= 1");
  SeriesCoefficients a = a_side_coefficients(E, params, M);
  SeriesCoefficients b = b_side_coefficients(E, params, M, a);

  const double alpha = params.g / params.omega;
  Reconstruction rec;
  accumulate_side(a, usable_ladder_cut(a, M), -alpha, false, n_max,
                  rec.a_amplitudes);
  accumulate_side(b, usable_ladder_cut(b, M), alpha, true, n_max,
                  rec.b_amplitudes);

  double dot = 0.0;
  for (std::size_t i = 0; i < rec.a_amplitudes.size(); ++i)
    dot += rec.a_amplitudes[i] * rec.b_amplitudes[i];
  rec.cosine_similarity = std::fabs(dot);
  return rec;
}

std::vector<RootRecord> find_roots(
    const ModelParams& params, double e_min, double e_max, double scan_step,
    double root_tol, const std::optional<FockTruncation>& trunc_for_oracle,
    const GPolicy& policy, int threads) {
  validate(params);
  require(std::isfinite(e_min) && std::isfinite(e_max) && e_min < e_max,
          "find_roots: empty or non-finite energy window");
  require(scan_step > 0.0, "find_roots: scan_step must be positive");
  require(root_tol > 0.0, "find_roots: root_tol must be positive");
  if (params.g == 0.0)
    throw Error(ErrorCode::ZeroCoupling,
                "find_roots: g = 0 spectrum is the bare ladder, use ED");
  if (params.epsilon == 0.0)
    throw Error(ErrorCode::SectorUnavailable,
                "find_roots: the resonant model reduces to parity-sector "
                "ladders; use the sector solvers instead");

  const double guard = policy.pole_guard * params.omega;
  const std::vector<double> poles =
      pole_locations(params, e_min - guard, e_max + guard);
  auto near_pole = [&](double x) {
    for (double p : poles)
      if (std::fabs(x - p) <= guard) return true;
    return false;
  };
  auto pole_between = [&](double lo, double hi) {
    for (double p : poles)
      if (p > lo && p < hi) return true;
    return false;
  };

  const std::size_t count =
      static_cast<std::size_t>(std::floor((e_max - e_min) / scan_step)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = e_min + scan_step * i;

  std::vector<double> values(count, 0.0);
  std::vector<char> valid(count, 0);
  auto eval_point = [&](std::size_t i) {
    if (near_pole(grid[i])) return;
    try {
      values[i] = g_function(grid[i], params, policy).value;
      valid[i] = 1;
    } catch (const Error&) {
      // leave the point invalid; the bracket pass treats it as a gap
    }
  };
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) eval_point(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w]() {
        for (std::size_t i = w; i < count; i += workers) eval_point(i);
      });
    for (auto& t : pool) t.join();
  }

  std::vector<double> ed_levels;
  if (trunc_for_oracle) {
    ed_levels = eigenvalues(
        build_sector_hamiltonian(params, *trunc_for_oracle,
                                 Sector::TripletRotated));
  }
  auto nearest_ed = [&](double x) {
    double best = std::numeric_limits<double>::infinity();
    for (double v : ed_levels) best = std::min(best, std::fabs(x - v));
    return best;
  };

  std::vector<RootRecord> records;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::size_t prev = count;  // index of the last valid point seen
  for (std::size_t i = 0; i < count; ++i) {
    if (!valid[i]) continue;
    if (prev != count && sign_of(values[prev]) * sign_of(values[i]) < 0.0) {
      if (pole_between(grid[prev], grid[i])) {
        // Sign change straddling an excluded band: a root could hide at
        // the pole itself (degenerate level), so surface it unconfirmed.
        RootRecord rec;
        rec.E = 0.5 * (grid[prev] + grid[i]);
        rec.status = RootStatus::ExceptionalCandidate;
        rec.residual_G = nan;
        rec.proportionality = nan;
        if (trunc_for_oracle) rec.ed_match = nearest_ed(rec.E);
        records.push_back(rec);
      } else {
        double lo = grid[prev], hi = grid[i];
        double f_lo = values[prev];
        double mid = 0.5 * (lo + hi), f_mid = 0.0;
        for (int iter = 0; iter < 200; ++iter) {
          mid = 0.5 * (lo + hi);
          f_mid = g_function(mid, params, policy).value;
          if (std::fabs(f_mid) <= root_tol) break;
          if (sign_of(f_mid) == sign_of(f_lo)) {
            lo = mid;
            f_lo = f_mid;
          } else {
            hi = mid;
          }
          if (hi - lo <= 1e-15 * std::max(1.0, std::fabs(mid))) break;
        }
        RootRecord rec;
        rec.E = mid;
        rec.residual_G = std::fabs(f_mid);
        const GEvaluation ge = g_function(mid, params, policy);
        const int n_rec = std::max(96, 2 * ge.M_used + 32);
        rec.proportionality =
            reconstruct_wavefunctions(mid, params, std::max(ge.M_used, 8),
                                      n_rec)
                .cosine_similarity;
        rec.status = rec.residual_G <= root_tol
                         ? RootStatus::Accepted
                         : RootStatus::ExceptionalCandidate;
        if (trunc_for_oracle) rec.ed_match = nearest_ed(rec.E);
        // A genuine eigenvalue has parallel expansions; an accidental
        // zero of the cross-ratio does not, and is dropped.
        if (rec.proportionality >= 1.0 - 1e-6) records.push_back(rec);
      }
    }
    prev = i;
  }
  return records;
}

std::vector<double> singlet_energies(const ModelParams& params, int n_count) {
  validate(params);
  require(n_count >= 1, "singlet_energies: n_count must be >= 1");
  std::vector<double> out(n_count);
  const double shift = params.g * params.g / params.omega;
  for (int n = 0; n < n_count; ++n) out[n] = params.omega * n - shift;
  return out;
}

}  // namespace tqr
