#include "tqr/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

namespace tqr {

namespace {

double pythag(double a, double b) {
  const double absa = std::fabs(a), absb = std::fabs(b);
  if (absa > absb) {
    const double r = absb / absa;
    return absa * std::sqrt(1.0 + r * r);
  }
  if (absb == 0.0) return 0.0;
  const double r = absa / absb;
  return absb * std::sqrt(1.0 + r * r);
}

// Householder reduction to tridiagonal form. z is dim x dim row-major;
// on exit d holds the diagonal, e the subdiagonal (e[0] unused), and z
// the accumulated orthogonal transform when want_vectors is set.
void tridiagonalize(std::vector<double>& z, int n, std::vector<double>& d,
                    std::vector<double>& e, bool want_vectors) {
  auto zz = [&z, n](int i, int j) -> double& {
    return z[std::size_t(i) * n + j];
  };
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k < i; ++k) scale += std::fabs(zz(i, k));
      if (scale == 0.0) {
        e[i] = zz(i, l);
      } else {
        for (int k = 0; k < i; ++k) {
          zz(i, k) /= scale;
          h += zz(i, k) * zz(i, k);
        }
        double f = zz(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        zz(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j < i; ++j) {
          if (want_vectors) zz(j, i) = zz(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += zz(j, k) * zz(i, k);
          for (int k = j + 1; k < i; ++k) g += zz(k, j) * zz(i, k);
          e[j] = g / h;
          f += e[j] * zz(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j < i; ++j) {
          f = zz(i, j);
          g = e[j] - hh * f;
          e[j] = g;
          for (int k = 0; k <= j; ++k) zz(j, k) -= f * e[k] + g * zz(i, k);
        }
      }
    } else {
      e[i] = zz(i, l);
    }
    d[i] = h;
  }
  if (want_vectors) d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    if (want_vectors) {
      if (d[i] != 0.0) {
        for (int j = 0; j < i; ++j) {
          double g = 0.0;
          for (int k = 0; k < i; ++k) g += zz(i, k) * zz(k, j);
          for (int k = 0; k < i; ++k) zz(k, j) -= g * zz(k, i);
        }
      }
      d[i] = zz(i, i);
      zz(i, i) = 1.0;
      for (int j = 0; j < i; ++j) zz(j, i) = zz(i, j) = 0.0;
    } else {
      d[i] = zz(i, i);
    }
  }
}

// Implicit-shift QL sweeps on the tridiagonal (d, e). Eigenvectors are
// rotated in the columns of z when want_vectors is set.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, int n,
                 std::vector<double>* z, bool want_vectors) {
  auto zz = [z, n](int i, int j) -> double& {
    return (*z)[std::size_t(i) * n + j];
  };
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  // Absolute deflation floor at the matrix scale. Density matrices carry
  // a sea of couplings orders of magnitude below eps * ||T|| (down to
  // denormals); the relative test alone never retires those and the sweep
  // budget drains without progress. Dropping them perturbs eigenvalues by
  // at most eps * ||T||, the standard backward-error allowance.
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    anorm = std::max(anorm, std::fabs(d[i]) + std::fabs(e[i]));
  const double floor_abs = std::numeric_limits<double>::epsilon() * anorm;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= std::numeric_limits<double>::epsilon() * dd ||
            std::fabs(e[m]) <= floor_abs)
          break;
      }
      if (m != l) {
        if (iter++ == 30)
          throw Error(ErrorCode::NonConvergence,
                      "eigensolve: QL sweep budget exhausted at block " +
                          std::to_string(l) + " of " + std::to_string(n));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = pythag(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = pythag(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (want_vectors) {
            for (int k = 0; k < n; ++k) {
              f = zz(k, i + 1);
              zz(k, i + 1) = s * zz(k, i) + c * f;
              zz(k, i) = c * zz(k, i) - s * f;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

EigenSystem eigensolve(const RealSymmetricMatrix& h, std::optional<int> k) {
  const int n = h.dim();
  if (n < 1)
    throw Error(ErrorCode::InvalidArgument, "eigensolve: empty matrix");
  if (k && (*k < 1 || *k > n))
    throw Error(ErrorCode::InvalidArgument,
                "eigensolve: k out of range [1, dim]");

  std::vector<double> z(h.data(), h.data() + std::size_t(n) * n);
  std::vector<double> d(n), e(n);
  tridiagonalize(z, n, d, e, true);
  ql_implicit(d, e, n, &z, true);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&d](int a, int b) { return d[a] < d[b]; });

  const int kept = k ? *k : n;
  EigenSystem out;
  out.dim = n;
  out.values.resize(kept);
  out.vectors.resize(std::size_t(kept) * n);
  for (int j = 0; j < kept; ++j) {
    const int col = order[j];
    out.values[j] = d[col];
    for (int i = 0; i < n; ++i)
      out.vectors[std::size_t(j) * n + i] = z[std::size_t(i) * n + col];
  }
  return out;
}

std::vector<double> eigenvalues(const RealSymmetricMatrix& h) {
  const int n = h.dim();
  if (n < 1)
    throw Error(ErrorCode::InvalidArgument, "eigenvalues: empty matrix");
  std::vector<double> z(h.data(), h.data() + std::size_t(n) * n);
  std::vector<double> d(n), e(n);
  tridiagonalize(z, n, d, e, false);
  ql_implicit(d, e, n, nullptr, false);
  std::sort(d.begin(), d.end());
  return d;
}

GroundState converged_ground_state(const ModelParams& params,
                                   const FockTruncation& trunc,
                                   Sector sector) {
  validate(params);
  validate(trunc);

  auto ground_energy = [&](int n_max) {
    FockTruncation t = trunc;
    t.n_max = n_max;
    return eigenvalues(build_sector_hamiltonian(params, t, sector)).front();
  };

  int n = trunc.n_max;
  double energy = ground_energy(n);
  for (;;) {
    const long next = static_cast<long>(n) * trunc.growth_factor;
    if (next > kTruncationCap)
      throw Error(ErrorCode::TruncationCeiling,
                  "ground state not converged at n_max " + std::to_string(n) +
                      " (cap " + std::to_string(kTruncationCap) + ")");
    const double refined = ground_energy(static_cast<int>(next));
    if (std::fabs(refined - energy) < trunc.tol * params.omega) break;
    n = static_cast<int>(next);
    energy = refined;
  }

  FockTruncation t = trunc;
  t.n_max = n;
  EigenSystem sys = eigensolve(build_sector_hamiltonian(params, t, sector), 1);
  GroundState gs;
  gs.energy = sys.values.front();
  gs.vector.assign(sys.vectors.begin(), sys.vectors.begin() + sys.dim);
  gs.n_max_used = n;
  return gs;
}

std::vector<SweepRow> spectrum_sweep(const ModelParams& params_base,
                                     const std::vector<double>& g_grid,
                                     const FockTruncation& trunc,
                                     Sector sector, int k, int threads) {
  validate(params_base);
  validate(trunc);
  if (g_grid.empty())
    throw Error(ErrorCode::InvalidArgument, "spectrum_sweep: empty g grid");
  if (!std::is_sorted(g_grid.begin(), g_grid.end()))
    throw Error(ErrorCode::InvalidArgument,
                "spectrum_sweep: g grid must be ascending");
  if (k < 1)
    throw Error(ErrorCode::InvalidArgument, "spectrum_sweep: k must be >= 1");

  const std::size_t rows = g_grid.size();
  std::vector<SweepRow> out(rows);
  std::vector<std::exception_ptr> failures(rows);

  auto run_row = [&](std::size_t i) {
    try {
      ModelParams p = params_base;
      p.g = g_grid[i];
      std::vector<double> vals =
          eigenvalues(build_sector_hamiltonian(p, trunc, sector));
      const std::size_t kept = std::min<std::size_t>(k, vals.size());
      out[i].g = g_grid[i];
      out[i].values.assign(vals.begin(), vals.begin() + kept);
    } catch (const Error& err) {
      failures[i] = std::make_exception_ptr(
          Error(err.code(), std::string(err.what()) + " at g = " +
                                std::to_string(g_grid[i])));
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };

  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(rows)));
  if (workers == 1) {
    for (std::size_t i = 0; i < rows; ++i) run_row(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w]() {
        for (std::size_t i = w; i < rows; i += workers) run_row(i);
      });
    for (auto& t : pool) t.join();
  }

  // Rows were written by index, so the merged table is identical for
  // every worker count; report the first failure in row order.
  for (std::size_t i = 0; i < rows; ++i)
    if (failures[i]) std::rethrow_exception(failures[i]);
  return out;
}

PhononDensityMatrix partial_trace_phonon(const std::vector<double>& psi,
                                         const FockTruncation& trunc) {
  validate(trunc);
  const std::size_t nph = std::size_t(trunc.n_max) + 1;
  if (psi.empty() || psi.size() % nph != 0)
    throw Error(ErrorCode::InvalidArgument,
                "partial_trace_phonon: state length is not a multiple of "
                "the phonon dimension");
  const std::size_t spin_dim = psi.size() / nph;
  if (spin_dim > 4)
    throw Error(ErrorCode::InvalidArgument,
                "partial_trace_phonon: spin dimension exceeds 4");

  double norm2 = 0.0;
  for (double v : psi) norm2 += v * v;
  if (std::fabs(std::sqrt(norm2) - 1.0) > 1e-8)
    throw Error(ErrorCode::InvalidArgument,
                "partial_trace_phonon: state is not normalized");

  PhononDensityMatrix rho;
  rho.n_max = trunc.n_max;
  rho.entries.assign(nph * nph, 0.0);
  for (std::size_t s = 0; s < spin_dim; ++s) {
    const double* block = psi.data() + s * nph;
    for (std::size_t m = 0; m < nph; ++m) {
      const double bm = block[m];
      if (bm == 0.0) continue;
      for (std::size_t n = m; n < nph; ++n)
        rho.entries[m * nph + n] += bm * block[n];
    }
  }
  for (std::size_t m = 0; m < nph; ++m)
    for (std::size_t n = 0; n < m; ++n)
      rho.entries[m * nph + n] = rho.entries[n * nph + m];
  return rho;
}

std::vector<double> embed_parity_vector(const std::vector<double>& psi,
                                        Sector sector) {
  if (sector != Sector::ResonantPlus && sector != Sector::ResonantMinus)
    return psi;
  const std::size_t nph = psi.size();
  if (nph == 0)
    throw Error(ErrorCode::InvalidArgument, "embed_parity_vector: empty state");
  // Parity basis state n lives in the collective spin block that keeps
  // (-1)^(n+s) fixed: even sector alternates 0,1,0,..., odd the reverse.
  const std::size_t offset = sector == Sector::ResonantPlus ? 0 : 1;
  std::vector<double> full(2 * nph, 0.0);
  for (std::size_t n = 0; n < nph; ++n) {
    const std::size_t s = (n + offset) % 2;
    full[s * nph + n] = psi[n];
  }
  return full;
}

}  // namespace tqr
