#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tqr/errors.hpp"
#include "tqr/gfunction.hpp"

using namespace tqr;

namespace {

// Fig.-3-style working point used throughout: a detuned triplet with all
// couplings of order one.
const ModelParams kP{1.0, 0.4, 0.2, 0.5};

// Levels of the same model from dense diagonalization at n_max = 240,
// computed once and pinned. The root finder must land on these.
const double kLevel0 = -0.425990845797151;
const double kLevel1 = -0.005185704118499;

std::vector<RootRecord> accepted(const std::vector<RootRecord>& rs) {
  std::vector<RootRecord> out;
  for (const auto& r : rs)
    if (r.status == RootStatus::Accepted) out.push_back(r);
  return out;
}

}  // namespace

TEST_CASE("pole families m - g^2/w and m - g^2/w +- 2 eps") {
  const auto poles = pole_locations(kP, -1.0, 1.0);
  const std::vector<double> expect{-0.65, -0.25, 0.15, 0.35, 0.75};
  REQUIRE(poles.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(poles[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("leading expansion coefficients match the recursion by hand") {
  const double E = -0.4;
  const auto a = a_side_coefficients(E, kP, 2);
  REQUIRE(a.d.size() >= 3u);
  CHECK(a.d[0] == 1.0);
  CHECK(a.log_scale == 0.0);

  const double D0 = E - 0.0 + 0.25;            // E - w m + g^2/w at m = 0
  const double D1 = E - 1.0 + 0.25;
  const double C0 = (0.0 + 0.75 - E +
                     2.0 * 0.16 * (1.0 / (D0 + 0.4) + 1.0 / (D0 - 0.4))) /
                    1.0;
  const double d1 = C0;
  CHECK(a.d[1] == doctest::Approx(d1).epsilon(1e-14));
  CHECK(a.c[0] ==
        doctest::Approx(std::sqrt(2.0) * 0.4 / (D0 - 0.4)).epsilon(1e-14));
  CHECK(a.e[0] ==
        doctest::Approx(std::sqrt(2.0) * 0.4 / (D0 + 0.4)).epsilon(1e-14));
  CHECK(a.c[1] ==
        doctest::Approx(std::sqrt(2.0) * 0.4 * d1 / (D1 - 0.4)).epsilon(1e-14));

  const double C1 = (1.0 + 0.75 - E +
                     2.0 * 0.16 * (1.0 / (D1 + 0.4) + 1.0 / (D1 - 0.4))) /
                    1.0;
  CHECK(a.d[2] == doctest::Approx((C1 * d1 - 1.0) / 2.0).epsilon(1e-13));
}

TEST_CASE("zero Rabi frequency degenerates the cross ratio to zero") {
  const ModelParams p{1.0, 0.0, 0.2, 0.5};
  const auto a = a_side_coefficients(-0.3, p, 6);
  for (double v : a.c) CHECK(v == 0.0);
  for (double v : a.e) CHECK(v == 0.0);
  const auto eval = g_function(-0.3, p);
  CHECK(eval.value == 0.0);
}

TEST_CASE("the cross ratio is odd under detuning reversal") {
  for (double E : {-0.8, -0.4, 0.05, 0.5}) {
    ModelParams flipped = kP;
    flipped.epsilon = -kP.epsilon;
    const double gp = g_function(E, kP).value;
    const double gm = g_function(E, flipped).value;
    CHECK(std::fabs(gp + gm) <= 1e-14 * std::max(1.0, std::fabs(gp)));
  }
}

TEST_CASE("evaluation inside a pole guard band is refused") {
  // E = 2 eps - g^2/w puts the m = 0 resolvent on its pole exactly.
  try {
    g_function(0.15, kP);
    FAIL("expected PoleProximity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PoleProximity);
  }
  const auto eval = g_function(0.15 + 0.01, kP);
  CHECK(eval.nearest_pole_distance == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("zero coupling is rejected up front") {
  ModelParams p = kP;
  p.g = 0.0;
  try {
    a_side_coefficients(-0.4, p, 4);
    FAIL("expected ZeroCoupling");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroCoupling);
  }
  CHECK_THROWS_AS(find_roots(p, -1.0, 0.0), Error);
}

TEST_CASE("root finding at resonance defers to the sector solvers") {
  ModelParams p = kP;
  p.epsilon = 0.0;
  try {
    find_roots(p, -1.0, 0.0);
    FAIL("expected SectorUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SectorUnavailable);
  }
}

TEST_CASE("adaptive truncation agrees with a long fixed series") {
  GPolicy fixed;
  fixed.fixed_M = 400;
  for (double E : {-0.7, -0.4, 0.3, 0.9}) {
    const auto ad = g_function(E, kP);
    const auto fx = g_function(E, kP, fixed);
    CHECK(ad.value ==
          doctest::Approx(fx.value).epsilon(1e-8));
    CHECK(ad.M_used >= 10);
    CHECK(ad.M_used <= 60);
    CHECK(fx.M_used == 400);
  }
}

TEST_CASE("a starved series cap raises NonConvergentSeries") {
  GPolicy tight;
  tight.cap = 6;
  tight.rel_tol = 1e-20;
  try {
    g_function(-0.4, kP, tight);
    FAIL("expected NonConvergentSeries");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonConvergentSeries);
  }
  // Pinning the length instead sums whatever is there, without protest.
  GPolicy pinned;
  pinned.fixed_M = 6;
  CHECK_NOTHROW(g_function(-0.4, kP, pinned));
}

TEST_CASE("roots in a two-level window land on the pinned levels") {
  const auto roots = accepted(find_roots(kP, -0.6, 0.1, 1e-3, 1e-9));
  REQUIRE(roots.size() == 2u);
  CHECK(std::fabs(roots[0].E - kLevel0) <= 1e-6);
  CHECK(std::fabs(roots[1].E - kLevel1) <= 1e-6);
  for (const auto& r : roots) {
    CHECK(r.residual_G <= 1e-9);
    CHECK(r.proportionality >= 1.0 - 1e-6);
    CHECK_FALSE(r.ed_match.has_value());
  }
}

TEST_CASE("the dense cross-check attaches level distances when asked") {
  FockTruncation trunc;
  trunc.n_max = 120;
  const auto roots =
      accepted(find_roots(kP, -0.6, 0.1, 1e-3, 1e-9, trunc));
  REQUIRE(roots.size() == 2u);
  for (const auto& r : roots) {
    REQUIRE(r.ed_match.has_value());
    CHECK(*r.ed_match <= 1e-6);
  }
}

TEST_CASE("a spurious cross-ratio zero is dropped by the proportionality check") {
  // G vanishes near E = 1.1975 without an eigenvalue there; the window
  // holds no true level and no pole, so the scan must come back empty.
  const auto roots = find_roots(kP, 1.19, 1.25, 1e-3, 1e-9);
  CHECK(roots.empty());
}

TEST_CASE("reconstructed expansions are parallel only at an eigenvalue") {
  const auto at_root = reconstruct_wavefunctions(kLevel0, kP, 40, 96);
  CHECK(at_root.cosine_similarity >= 1.0 - 1e-6);
  const auto off_root = reconstruct_wavefunctions(-0.2, kP, 40, 96);
  CHECK(off_root.cosine_similarity < 0.99);
  REQUIRE(at_root.a_amplitudes.size() == 3u * 97u);
  REQUIRE(at_root.b_amplitudes.size() == 3u * 97u);
}

TEST_CASE("singlet ladder energies") {
  const auto vals = singlet_energies(kP, 5);
  REQUIRE(vals.size() == 5u);
  for (int n = 0; n < 5; ++n)
    CHECK(vals[n] == doctest::Approx(n * 1.0 - 0.25).epsilon(1e-15));
}

TEST_CASE("evaluations are thread-count invariant in the scan") {
  const auto one = find_roots(kP, -0.6, 0.1, 2e-3, 1e-9, std::nullopt,
                              GPolicy{}, 1);
  const auto four = find_roots(kP, -0.6, 0.1, 2e-3, 1e-9, std::nullopt,
                               GPolicy{}, 4);
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].status == four[i].status);
    CHECK(one[i].E == four[i].E);
    // Exceptional candidates carry NaN residuals by contract; equality
    // must then be checked as joint NaN-ness.
    if (one[i].status == RootStatus::Accepted)
      CHECK(one[i].residual_G == four[i].residual_G);
    else
      CHECK((std::isnan(one[i].residual_G) && std::isnan(four[i].residual_G)));
  }
}

TEST_CASE("a pole inside the window surfaces as an exceptional candidate") {
  const auto all = find_roots(kP, -0.6, 0.1, 1e-3, 1e-9);
  REQUIRE(all.size() == 3u);
  CHECK(all[0].status == RootStatus::Accepted);
  CHECK(all[1].status == RootStatus::ExceptionalCandidate);
  CHECK(all[2].status == RootStatus::Accepted);
  // The candidate sits at the m = 0 ladder pole, E = -g^2/w.
  CHECK(all[1].E == doctest::Approx(-0.25).epsilon(1e-10));
  CHECK(std::isnan(all[1].residual_G));
  CHECK(std::isnan(all[1].proportionality));
}
