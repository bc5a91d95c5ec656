#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tqr/errors.hpp"
#include "tqr/phonon.hpp"

using namespace tqr;

namespace {

constexpr double kPi = 3.14159265358979323846;

PhononDensityMatrix make_ref(ReferenceState::Kind kind, double alpha,
                             int n_max = 120) {
  ReferenceState ref;
  ref.kind = kind;
  ref.alpha = alpha;
  ref.n_max = n_max;
  return reference_density(ref);
}

// Trapezoid rule over a uniform grid.
double trapezoid(const std::vector<double>& f, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) s += 0.5 * h * (f[i] + f[i + 1]);
  return s;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i)
    x[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return x;
}

// Dense X and P^2 / X^2 matrix elements in the Fock basis, assembled
// independently of the library: X = (a + a')/sqrt(2) has
// <m|X|n> = (sqrt(n+1) delta_{m,n+1} + sqrt(n) delta_{m,n-1})/sqrt(2),
// X^2 and P^2 follow from one explicit matrix square.
struct QuadOracle {
  int dim;
  std::vector<double> x, x2, p2;

  explicit QuadOracle(int n_max) : dim(n_max + 1) {
    x.assign(std::size_t(dim) * dim, 0.0);
    for (int n = 0; n + 1 < dim; ++n) {
      const double v = std::sqrt((n + 1) / 2.0);
      x[std::size_t(n + 1) * dim + n] = v;
      x[std::size_t(n) * dim + n + 1] = v;
    }
    // X^2 by explicit multiplication.
    x2.assign(std::size_t(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k) {
        const double xik = x[std::size_t(i) * dim + k];
        if (xik == 0.0) continue;
        for (int j = 0; j < dim; ++j)
          x2[std::size_t(i) * dim + j] += xik * x[std::size_t(k) * dim + j];
      }
    // P^2 = a'a + 1/2 - (a^2 + a'^2)/2 = (n + 1/2) on the diagonal minus
    // the off-diagonal part of X^2.
    p2.assign(std::size_t(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        const double off = i == j ? 0.0 : x2[std::size_t(i) * dim + j];
        p2[std::size_t(i) * dim + j] = -off;
      }
    for (int n = 0; n < dim; ++n) p2[std::size_t(n) * dim + n] = n + 0.5;
  }

  double expect(const std::vector<double>& op,
                const PhononDensityMatrix& rho) const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        s += op[std::size_t(i) * dim + j] * rho.at(j, i);
    return s;
  }
};

}  // namespace

TEST_CASE("coherent amplitudes match the closed form") {
  double tail = -1.0;
  const auto c = coherent_state(1.3, 60, &tail);
  REQUIRE(c.size() == 61u);
  CHECK(tail >= 0.0);
  CHECK(tail <= 1e-12);
  double lognfact = 0.0;
  for (int n = 0; n <= 12; ++n) {
    if (n > 0) lognfact += std::log(static_cast<double>(n));
    const double expect =
        std::exp(-0.5 * 1.3 * 1.3 + n * std::log(1.3) - 0.5 * lognfact);
    CHECK(c[n] == doctest::Approx(expect).epsilon(1e-12));
  }
  double norm = 0.0;
  for (double v : c) norm += v * v;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("coherent tail mass grows when the cutoff starves the state") {
  double tail = 0.0;
  coherent_state(4.0, 18, &tail);
  CHECK(tail > 1e-10);
  const auto c = coherent_state(4.0, 18);
  double norm = 0.0;
  for (double v : c) norm += v * v;
  // Renormalized even when truncation bites.
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("vacuum reference is the n = 0 projector") {
  const auto rho = make_ref(ReferenceState::Kind::Vacuum, 0.7, 24);
  CHECK(rho.n_max == 24);
  for (int m = 0; m <= 24; ++m)
    for (int n = 0; n <= 24; ++n)
      CHECK(rho.at(m, n) == (m == 0 && n == 0 ? 1.0 : 0.0));
}

TEST_CASE("pure references have unit purity, the mixture does not") {
  const double a = 1.1;
  CHECK(purity(make_ref(ReferenceState::Kind::Coherent, a)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(purity(make_ref(ReferenceState::Kind::CatPlus, a)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(purity(make_ref(ReferenceState::Kind::CatMinus, a)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Equal-weight mixture of |a> and |-a>: tr rho^2 = (1 + e^{-4a^2})/2.
  const double expect = 0.5 * (1.0 + std::exp(-4.0 * a * a));
  CHECK(purity(make_ref(ReferenceState::Kind::Mixture, a)) ==
        doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("cat parity shows up as alternating Fock support") {
  const auto plus = make_ref(ReferenceState::Kind::CatPlus, 1.4, 40);
  const auto minus = make_ref(ReferenceState::Kind::CatMinus, 1.4, 40);
  for (int n = 0; n <= 40; ++n) {
    if (n % 2 == 1) CHECK(plus.at(n, n) == 0.0);
    if (n % 2 == 0) CHECK(minus.at(n, n) == 0.0);
  }
}

TEST_CASE("the odd cat does not exist at zero displacement") {
  try {
    make_ref(ReferenceState::Kind::CatMinus, 0.0);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  // The even cat degenerates gracefully to the vacuum.
  const auto rho = make_ref(ReferenceState::Kind::CatPlus, 0.0, 10);
  CHECK(rho.at(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("position density of vacuum and coherent states is Gaussian") {
  const auto x = linspace(-8.0, 8.0, 801);
  const double h = x[1] - x[0];

  const auto vac = position_density(make_ref(ReferenceState::Kind::Vacuum, 0.0), x);
  REQUIRE(vac.size() == x.size());
  for (std::size_t i = 0; i < x.size(); i += 40) {
    const double expect = std::exp(-x[i] * x[i]) / std::sqrt(kPi);
    CHECK(vac[i] == doctest::Approx(expect).epsilon(1e-10).scale(1.0));
  }
  CHECK(trapezoid(vac, h) == doctest::Approx(1.0).epsilon(1e-8));

  // A displaced ground state: same Gaussian centered at sqrt(2) alpha.
  const double a = 1.7;
  const auto coh = position_density(make_ref(ReferenceState::Kind::Coherent, a), x);
  for (std::size_t i = 0; i < x.size(); i += 40) {
    const double u = x[i] - std::sqrt(2.0) * a;
    const double expect = std::exp(-u * u) / std::sqrt(kPi);
    CHECK(coh[i] == doctest::Approx(expect).epsilon(1e-8).scale(1.0));
  }
  CHECK(trapezoid(coh, h) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("quadrature statistics against a dense operator oracle") {
  const int n_max = 60;
  const QuadOracle oracle(n_max);

  const auto vac = make_ref(ReferenceState::Kind::Vacuum, 0.0, n_max);
  auto s = quadrature_variances(vac);
  CHECK(s.mean_x == 0.0);
  CHECK(s.mean_p == 0.0);
  CHECK(s.var_x == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s.var_p == doctest::Approx(0.5).epsilon(1e-14));

  for (auto kind : {ReferenceState::Kind::Coherent, ReferenceState::Kind::CatPlus,
                    ReferenceState::Kind::Mixture}) {
    const auto rho = make_ref(kind, 1.2, n_max);
    s = quadrature_variances(rho);
    const double mean_x = oracle.expect(oracle.x, rho);
    const double var_x = oracle.expect(oracle.x2, rho) - mean_x * mean_x;
    const double var_p = oracle.expect(oracle.p2, rho);  // mean_p = 0, real rho
    CHECK(s.mean_x == doctest::Approx(mean_x).epsilon(1e-11).scale(1.0));
    CHECK(s.mean_p == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(s.var_x == doctest::Approx(var_x).epsilon(1e-11));
    CHECK(s.var_p == doctest::Approx(var_p).epsilon(1e-11));
  }

  // Coherent states keep both variances at the vacuum value.
  s = quadrature_variances(make_ref(ReferenceState::Kind::Coherent, 1.2, n_max));
  CHECK(s.mean_x == doctest::Approx(std::sqrt(2.0) * 1.2).epsilon(1e-12));
  CHECK(s.var_x == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(s.var_p == doctest::Approx(0.5).epsilon(1e-11));
}

TEST_CASE("fidelity basics") {
  const auto coh = make_ref(ReferenceState::Kind::Coherent, 0.9, 80);
  const auto vac = make_ref(ReferenceState::Kind::Vacuum, 0.0, 80);

  // The clamped eigendecompositions of a rank-deficient state leave
  // residuals of order 1e-8, so these are 1e-7 checks, not 1e-12 ones.
  CHECK(fidelity(coh, coh) == doctest::Approx(1.0).epsilon(1e-7));

  // |<0|a>|^2 = e^{-a^2}, in both argument orders
  const double expect = std::exp(-0.81);
  CHECK(fidelity(vac, coh) == doctest::Approx(expect).epsilon(1e-7));
  CHECK(fidelity(coh, vac) == doctest::Approx(expect).epsilon(1e-7));

  // Against a pure state F reduces to <a|rho|a>; for the equal mixture of
  // |a> and |-a> that is (1 + e^{-4a^2})/2.
  const double a = 0.9;
  const auto mix = make_ref(ReferenceState::Kind::Mixture, a, 80);
  CHECK(fidelity(mix, coh) ==
        doctest::Approx(0.5 * (1.0 + std::exp(-4.0 * a * a))).epsilon(1e-6));
}

TEST_CASE("fidelity input validation") {
  const auto ok = make_ref(ReferenceState::Kind::Coherent, 0.5, 30);

  PhononDensityMatrix bad_trace = ok;
  bad_trace.at(0, 0) += 1e-3;
  CHECK_THROWS_AS(fidelity(bad_trace, ok), Error);
  try {
    fidelity(bad_trace, ok);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAState);
  }

  // A symmetric, unit-trace matrix with a genuinely negative eigenvalue.
  PhononDensityMatrix indef;
  indef.n_max = 1;
  indef.entries = {0.5, 0.7, 0.7, 0.5};
  try {
    fidelity(indef, make_ref(ReferenceState::Kind::Vacuum, 0.0, 1));
    FAIL("expected NotAState");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAState);
  }

  const auto small = make_ref(ReferenceState::Kind::Coherent, 0.5, 29);
  CHECK_THROWS_AS(fidelity(ok, small), Error);
}

TEST_CASE("wigner function of the vacuum is the unit Gaussian") {
  const auto vac = make_ref(ReferenceState::Kind::Vacuum, 0.0, 40);
  PhaseSpaceGrid grid;
  grid.x_min = grid.p_min = -5.0;
  grid.x_max = grid.p_max = 5.0;
  grid.nx = grid.np = 101;
  const auto w = wigner(vac, grid);
  REQUIRE(w.values.size() == 101u * 101u);
  CHECK_FALSE(w.coarse_grid);
  for (int ip = 0; ip < 101; ip += 10)
    for (int ix = 0; ix < 101; ix += 10) {
      const double x = -5.0 + 0.1 * ix, p = -5.0 + 0.1 * ip;
      const double expect = std::exp(-x * x - p * p) / kPi;
      CHECK(w.at(ip, ix) == doctest::Approx(expect).epsilon(1e-10).scale(1.0));
    }
  CHECK(w.integral == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(w.min_value >= 0.0);
}

TEST_CASE("wigner peak of a coherent state sits at its displacement") {
  const double a = 1.5;
  const auto rho = make_ref(ReferenceState::Kind::Coherent, a, 80);
  PhaseSpaceGrid grid;
  grid.nx = grid.np = 81;
  const auto w = wigner(rho, grid);
  // W(0,0) = (1/pi) e^{-2 a^2} for a real-displaced coherent state.
  const int mid = 40;  // x = p = 0 on the symmetric default window
  CHECK(w.at(mid, mid) ==
        doctest::Approx(std::exp(-2.0 * a * a) / kPi).epsilon(1e-8).scale(1.0));
  CHECK(w.integral == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(w.min_value >= -1e-12);
}

TEST_CASE("interference fringes make the even cat negative, not the mixture") {
  PhaseSpaceGrid grid;
  grid.nx = grid.np = 121;
  const auto cat = wigner(make_ref(ReferenceState::Kind::CatPlus, 1.5, 80), grid);
  CHECK(cat.min_value < -0.05);
  CHECK(cat.integral == doctest::Approx(1.0).epsilon(1e-6));
  const auto mix = wigner(make_ref(ReferenceState::Kind::Mixture, 1.5, 80), grid);
  CHECK(mix.min_value >= -1e-12);
  CHECK(mix.integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("wigner rows are thread-count invariant") {
  const auto rho = make_ref(ReferenceState::Kind::CatPlus, 1.2, 60);
  PhaseSpaceGrid grid;
  grid.nx = 64;
  grid.np = 48;
  const auto w1 = wigner(rho, grid, 1);
  const auto w3 = wigner(rho, grid, 3);
  REQUIRE(w1.values.size() == w3.values.size());
  for (std::size_t i = 0; i < w1.values.size(); ++i)
    CHECK(w1.values[i] == w3.values[i]);
  CHECK(w1.integral == w3.integral);
  CHECK(w1.min_value == w3.min_value);
}

TEST_CASE("a sparse grid is flagged coarse") {
  PhaseSpaceGrid grid;
  grid.nx = 41;  // 16 / 40 = 0.4 spacing on the default window
  grid.np = 161;
  const auto w = wigner(make_ref(ReferenceState::Kind::Vacuum, 0.0, 20), grid);
  CHECK(w.coarse_grid);
}
