#include "tqr/phonon.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <thread>
#include <vector>

#include "tqr/kernels.hpp"

namespace tqr {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, msg);
}

void check_shape(const PhononDensityMatrix& rho, const char* who) {
  if (rho.n_max < 0 ||
      rho.entries.size() !=
          std::size_t(rho.n_max + 1) * std::size_t(rho.n_max + 1))
    throw Error(ErrorCode::InvalidArgument,
                std::string(who) + ": malformed density matrix");
}

PhononDensityMatrix outer(const std::vector<double>& v) {
  PhononDensityMatrix rho;
  rho.n_max = static_cast<int>(v.size()) - 1;
  rho.entries.resize(v.size() * v.size());
  for (std::size_t m = 0; m < v.size(); ++m)
    for (std::size_t n = 0; n < v.size(); ++n)
      rho.entries[m * v.size() + n] = v[m] * v[n];
  return rho;
}

// Harmonic-oscillator eigenfunctions psi_0..psi_n_max at x, unit
// frequency: psi_0 = pi^(-1/4) exp(-x^2/2), then the two-term ladder.
void hermite_column(double x, int n_max, std::vector<double>& psi) {
  psi.resize(n_max + 1);
  psi[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  if (n_max >= 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int n = 2; n <= n_max; ++n)
    psi[n] = std::sqrt(2.0 / n) * x * psi[n - 1] -
             std::sqrt((n - 1.0) / n) * psi[n - 2];
}

}  // namespace

std::vector<double> coherent_state(double alpha, int n_max,
                                   double* tail_mass) {
  require(std::isfinite(alpha), "coherent_state: alpha must be finite");
  require(n_max >= 0, "coherent_state: n_max must be non-negative");
  std::vector<double> v(n_max + 1);
  // log-space magnitudes dodge overflow of alpha^n before the factorial
  // catches up; signs alternate with n for negative alpha
  const double la = std::log(std::fabs(alpha));
  double mass = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    double amp;
    if (alpha == 0.0) {
      amp = n == 0 ? 1.0 : 0.0;
    } else {
      const double lg =
          -0.5 * alpha * alpha + n * la - 0.5 * std::lgamma(n + 1.0);
      amp = std::exp(lg);
      if (alpha < 0.0 && n % 2 == 1) amp = -amp;
    }
    v[n] = amp;
    mass += amp * amp;
  }
  if (tail_mass) *tail_mass = std::max(0.0, 1.0 - mass);
  if (mass > 0.0) {
    const double inv = 1.0 / std::sqrt(mass);
    for (double& a : v) a *= inv;
  }
  return v;
}

PhononDensityMatrix reference_density(const ReferenceState& ref) {
  require(ref.n_max >= 0, "reference_density: n_max must be non-negative");
  require(std::isfinite(ref.alpha), "reference_density: alpha must be finite");
  switch (ref.kind) {
    case ReferenceState::Kind::Vacuum:
      return outer(coherent_state(0.0, ref.n_max));
    case ReferenceState::Kind::Coherent:
      return outer(coherent_state(ref.alpha, ref.n_max));
    case ReferenceState::Kind::CatPlus:
    case ReferenceState::Kind::CatMinus: {
      const double sign = ref.kind == ReferenceState::Kind::CatPlus ? 1. : -1.;
      const std::vector<double> plus = coherent_state(ref.alpha, ref.n_max);
      std::vector<double> cat(plus.size());
      double norm2 = 0.0;
      for (std::size_t n = 0; n < plus.size(); ++n) {
        const double minus = (n % 2 == 0 ? 1.0 : -1.0) * plus[n];
        cat[n] = plus[n] + sign * minus;
        norm2 += cat[n] * cat[n];
      }
      if (norm2 < 1e-300)
        throw Error(ErrorCode::InvalidArgument,
                    "reference_density: the odd cat vanishes at alpha = 0");
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& a : cat) a *= inv;
      return outer(cat);
    }
    case ReferenceState::Kind::Mixture: {
      const std::vector<double> v = coherent_state(ref.alpha, ref.n_max);
      PhononDensityMatrix rho = outer(v);
      // |-a><-a| carries (-1)^(m+n) relative signs; averaging kills the
      // odd-(m+n) entries and keeps the even ones unchanged.
      const std::size_t dim = v.size();
      for (std::size_t m = 0; m < dim; ++m)
        for (std::size_t n = 0; n < dim; ++n)
          if ((m + n) % 2 == 1) rho.entries[m * dim + n] = 0.0;
      return rho;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "reference_density: unknown kind");
}

std::vector<double> position_density(const PhononDensityMatrix& rho,
                                     const std::vector<double>& x_grid) {
  check_shape(rho, "position_density");
  const std::size_t dim = rho.n_max + 1;
  std::vector<double> out(x_grid.size());
  std::vector<double> psi, scratch(dim);
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    require(std::isfinite(x_grid[i]), "position_density: non-finite x");
    hermite_column(x_grid[i], rho.n_max, psi);
    for (std::size_t m = 0; m < dim; ++m)
      scratch[m] = kernels::dot(rho.entries.data() + m * dim, psi.data(), dim);
    out[i] = kernels::dot(scratch.data(), psi.data(), dim);
  }
  return out;
}

namespace {

// One row block of the Moyal expansion. For each point the k = 0 diagonal
// series seeds the accumulator; every k >= 1 band adds
// 2 cos(k theta) (|beta|^k / sqrt(k!)) sum_m w_m^k L_m^k(2 r^2), with
// cos(k theta) by Chebyshev recurrence and the beta factor accumulated
// multiplicatively. Band weights w_m^k are point-independent.
void wigner_rows(const PhononDensityMatrix& rho, const PhaseSpaceGrid& grid,
                 const std::vector<std::vector<double>>& band_weights,
                 int row_begin, int row_end, std::vector<double>& values) {
  const int dim = rho.n_max + 1;
  const std::size_t nx = grid.nx;
  const double dx = (grid.x_max - grid.x_min) / (grid.nx - 1);
  const double dp = (grid.p_max - grid.p_min) / (grid.np - 1);

  std::vector<double> u(nx), beta(nx), expf(nx), cth(nx), ck(nx), ckm1(nx),
      f(nx), acc(nx), band(nx);
  for (int ip = row_begin; ip < row_end; ++ip) {
    const double p = grid.p_min + dp * ip;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double x = grid.x_min + dx * ix;
      const double r2 = x * x + p * p;
      u[ix] = 2.0 * r2;
      beta[ix] = std::sqrt(2.0 * r2);
      expf[ix] = std::exp(-r2);
      cth[ix] = std::cos(std::atan2(p, x));
      ck[ix] = cth[ix];  // cos(k theta), entering the loop at k = 1
      ckm1[ix] = 1.0;    // cos((k-1) theta)
      f[ix] = 1.0;       // |beta|^k / sqrt(k!), likewise
    }

    kernels::laguerre_weighted_sum(0, band_weights[0].data(), dim, u.data(),
                                   nx, acc.data());
    for (int k = 1; k < dim; ++k) {
      const double inv_sqrt_k = 1.0 / std::sqrt(double(k));
      for (std::size_t ix = 0; ix < nx; ++ix) f[ix] *= beta[ix] * inv_sqrt_k;
      if (!band_weights[k].empty()) {
        kernels::laguerre_weighted_sum(k, band_weights[k].data(), dim - k,
                                       u.data(), nx, band.data());
        for (std::size_t ix = 0; ix < nx; ++ix)
          acc[ix] += 2.0 * ck[ix] * f[ix] * band[ix];
      }
      for (std::size_t ix = 0; ix < nx; ++ix) {
        const double next = 2.0 * cth[ix] * ck[ix] - ckm1[ix];
        ckm1[ix] = ck[ix];
        ck[ix] = next;
      }
    }
    for (std::size_t ix = 0; ix < nx; ++ix)
      values[std::size_t(ip) * nx + ix] = expf[ix] * acc[ix] / M_PI;
  }
}

}  // namespace

WignerResult wigner(const PhononDensityMatrix& rho, const PhaseSpaceGrid& grid,
                    int threads) {
  check_shape(rho, "wigner");
  require(grid.nx >= 2 && grid.np >= 2, "wigner: grid needs >= 2 points/axis");
  require(grid.x_max > grid.x_min && grid.p_max > grid.p_min,
          "wigner: grid bounds must be ordered");

  const int dim = rho.n_max + 1;
  // w_m^k = rho[m][m+k] (-1)^m sqrt(m! k! / (m+k)!); all factors <= 1, so
  // the band weights never overflow regardless of n_max.
  std::vector<std::vector<double>> band_weights(dim);
  for (int k = 0; k < dim; ++k) {
    std::vector<double> w(dim - k, 0.0);
    bool any = false;
    for (int m = 0; m + k < dim; ++m) {
      const double entry = rho.entries[std::size_t(m) * dim + m + k];
      if (entry == 0.0) continue;
      const double lg = 0.5 * (std::lgamma(m + 1.0) + std::lgamma(k + 1.0) -
                               std::lgamma(m + k + 1.0));
      w[m] = entry * std::exp(lg) * (m % 2 == 0 ? 1.0 : -1.0);
      any = true;
    }
    if (any || k == 0)
      band_weights[k] = std::move(w);
  }

  WignerResult out;
  out.grid = grid;
  out.values.assign(std::size_t(grid.np) * grid.nx, 0.0);
  const double dx = (grid.x_max - grid.x_min) / (grid.nx - 1);
  const double dp = (grid.p_max - grid.p_min) / (grid.np - 1);
  out.coarse_grid = dx > 0.2 || dp > 0.2;

  const int workers = std::max(1, std::min(threads, grid.np));
  if (workers == 1) {
    wigner_rows(rho, grid, band_weights, 0, grid.np, out.values);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (grid.np + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(grid.np, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end]() {
        wigner_rows(rho, grid, band_weights, begin, end, out.values);
      });
    }
    for (auto& t : pool) t.join();
  }

  out.min_value = *std::min_element(out.values.begin(), out.values.end());
  double integral = 0.0;
  for (int ip = 0; ip < grid.np; ++ip) {
    const double wp = (ip == 0 || ip == grid.np - 1) ? 0.5 : 1.0;
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double wx = (ix == 0 || ix == grid.nx - 1) ? 0.5 : 1.0;
      integral += wp * wx * out.at(ip, ix);
    }
  }
  out.integral = integral * dx * dp;
  return out;
}

double fidelity(const PhononDensityMatrix& rho,
                const PhononDensityMatrix& sigma) {
  check_shape(rho, "fidelity");
  check_shape(sigma, "fidelity");
  if (rho.n_max != sigma.n_max)
    throw Error(ErrorCode::InvalidArgument,
                "fidelity: density matrices have different truncations");
  const int dim = rho.n_max + 1;

  auto as_matrix = [dim](const PhononDensityMatrix& m) {
    RealSymmetricMatrix h(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        h.at(i, j) = 0.5 * (m.entries[std::size_t(i) * dim + j] +
                            m.entries[std::size_t(j) * dim + i]);
    return h;
  };
  auto check_state = [dim](const EigenSystem& sys, const char* who) {
    double trace = 0.0;
    for (double v : sys.values) {
      trace += v;
      if (v < -1e-10)
        throw Error(ErrorCode::NotAState,
                    std::string(who) + ": eigenvalue " + std::to_string(v) +
                        " below the -1e-10 positivity floor");
    }
    if (std::fabs(trace - 1.0) > 1e-8)
      throw Error(ErrorCode::NotAState,
                  std::string(who) + ": trace deviates from 1 by " +
                      std::to_string(trace - 1.0));
    (void)dim;
  };

  const EigenSystem es_rho = eigensolve(as_matrix(rho));
  check_state(es_rho, "fidelity: first argument");
  const EigenSystem es_sigma = eigensolve(as_matrix(sigma));
  check_state(es_sigma, "fidelity: second argument");

  // sqrt(rho) = V sqrt(clamped lambda) V^T
  std::vector<double> root(std::size_t(dim) * dim, 0.0);
  for (int j = 0; j < dim; ++j) {
    const double lam = std::max(0.0, es_rho.values[j]);
    const double s = std::sqrt(lam);
    if (s == 0.0) continue;
    const double* v = es_rho.vector(j);
    for (int a = 0; a < dim; ++a) {
      const double va = s * v[a];
      if (va == 0.0) continue;
      for (int b = 0; b < dim; ++b)
        root[std::size_t(a) * dim + b] += va * v[b];
    }
  }

  // m = sqrt(rho) sigma sqrt(rho), symmetrized against roundoff
  std::vector<double> tmp(std::size_t(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) {
      const double r = root[std::size_t(i) * dim + k];
      if (r == 0.0) continue;
      const double* srow = sigma.entries.data() + std::size_t(k) * dim;
      double* trow = tmp.data() + std::size_t(i) * dim;
      kernels::axpy(r, srow, trow, dim);
    }
  RealSymmetricMatrix inner(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      double acc = kernels::dot(tmp.data() + std::size_t(i) * dim,
                                root.data() + std::size_t(j) * dim, dim);
      inner.at(i, j) = acc;
    }
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      const double s = 0.5 * (inner.at(i, j) + inner.at(j, i));
      inner.at(i, j) = s;
      inner.at(j, i) = s;
    }

  double sum_root = 0.0;
  for (double mu : eigenvalues(inner)) sum_root += std::sqrt(std::max(0.0, mu));
  return sum_root * sum_root;
}

double purity(const PhononDensityMatrix& rho) {
  check_shape(rho, "purity");
  return kernels::dot(rho.entries.data(), rho.entries.data(),
                      rho.entries.size());
}

QuadratureStats quadrature_variances(const PhononDensityMatrix& rho) {
  check_shape(rho, "quadrature_variances");
  const std::size_t dim = rho.n_max + 1;
  auto at = [&](std::size_t m, std::size_t n) {
    return rho.entries[m * dim + n];
  };
  double n_term = 0.0, off1 = 0.0, off2 = 0.0;
  for (std::size_t n = 0; n < dim; ++n) {
    n_term += at(n, n) * (n + 0.5);
    if (n + 1 < dim) off1 += std::sqrt(n + 1.0) * at(n, n + 1);
    if (n + 2 < dim) off2 += std::sqrt((n + 1.0) * (n + 2.0)) * at(n, n + 2);
  }
  QuadratureStats q;
  q.mean_x = std::sqrt(2.0) * off1;
  q.mean_p = 0.0;  // real density matrix: <i(a' - a)> has no real part
  q.var_x = n_term + off2 - q.mean_x * q.mean_x;
  q.var_p = n_term - off2;
  return q;
}

}  // namespace tqr
