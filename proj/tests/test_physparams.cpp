#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "tqr/errors.hpp"
#include "tqr/physparams.hpp"

using namespace tqr;

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// The Sr-88 working point used in the hardware estimates: nu = 2 pi x
// 2.02 MHz, Omega = 2 pi x 25 kHz, dipolar slope 2 pi x 174.7 MHz/um.
PhysicalIonParams sr88() {
  PhysicalIonParams p;
  p.mass_amu = 88.0;
  p.net_charge = 1;
  p.nu = kTwoPi * 2.02e6;
  p.Omega_drive = kTwoPi * 25.0e3;
  p.Vd_slope = kTwoPi * 174.7e6 / 1e-6;
  return p;
}

}  // namespace

TEST_CASE("derived quantities at the Sr-88 working point, breathing mode") {
  const auto d = derive_trap(sr88());
  // All six pinned against an independent evaluation of the closed forms
  // at full double precision.
  CHECK(d.l0 == doctest::Approx(2.6962861528221603e-06).epsilon(1e-12));
  CHECK(d.omega_breathing ==
        doctest::Approx(std::sqrt(3.0) * kTwoPi * 2.02e6).epsilon(1e-15));
  CHECK(d.l_b == doctest::Approx(4.0514572918467689e-09).epsilon(1e-12));
  CHECK(d.g == doctest::Approx(1111793.2863652185).epsilon(1e-12));
  CHECK(d.g_c == doctest::Approx(1858257.4006861958).epsilon(1e-12));
  CHECK(d.ratio == doctest::Approx(0.59829886104835006).epsilon(1e-12));
}

TEST_CASE("derived quantities at the Sr-88 working point, trap mode") {
  auto p = sr88();
  p.lb_convention = LbConvention::TrapMode;
  const auto d = derive_trap(p);
  CHECK(d.l0 == doctest::Approx(2.6962861528221603e-06).epsilon(1e-12));
  CHECK(d.l_b == doctest::Approx(5.3320176563864142e-09).epsilon(1e-12));
  CHECK(d.g == doctest::Approx(1463202.2519603125).epsilon(1e-12));
  CHECK(d.g_c == doctest::Approx(1411970.2861675418).epsilon(1e-12));
  CHECK(d.ratio == doctest::Approx(1.0362840254463341).epsilon(1e-12));
}

TEST_CASE("the two conventions differ by fixed fourth-root-of-3 factors") {
  const auto db = derive_trap(sr88());
  auto p = sr88();
  p.lb_convention = LbConvention::TrapMode;
  const auto dt = derive_trap(p);

  // l_b scales as 1/sqrt(w_ref), so trap over breathing is 3^{1/4}; the
  // ratio g/g_c picks up 3^{1/4} from l_b and 3^{1/4} from g_c.
  const double r4 = std::pow(3.0, 0.25);
  CHECK(dt.l_b / db.l_b == doctest::Approx(r4).epsilon(1e-13));
  CHECK(dt.g / db.g == doctest::Approx(r4).epsilon(1e-13));
  CHECK(dt.g_c / db.g_c == doctest::Approx(1.0 / r4).epsilon(1e-13));
  CHECK(dt.ratio / db.ratio == doctest::Approx(std::sqrt(3.0)).epsilon(1e-13));
  // The separation and the mode frequency do not depend on the convention.
  CHECK(dt.l0 == db.l0);
  CHECK(dt.omega_breathing == db.omega_breathing);
}

TEST_CASE("separation scales with charge and frequency as N^(2/3) nu^(-2/3)") {
  auto p = sr88();
  const double l1 = derive_trap(p).l0;
  p.net_charge = 2;
  const double l2 = derive_trap(p).l0;
  CHECK(l2 / l1 == doctest::Approx(std::pow(4.0, 1.0 / 3.0)).epsilon(1e-13));

  p = sr88();
  p.nu *= 8.0;
  const double l8 = derive_trap(p).l0;
  CHECK(l8 / l1 == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("normalization to model units uses the breathing frequency") {
  const auto p = sr88();
  const double detuning = kTwoPi * 10.0e3;
  const auto nm = model_params_from_physical(p, detuning);
  const auto d = derive_trap(p);

  CHECK(nm.scale == doctest::Approx(std::sqrt(3.0) * p.nu).epsilon(1e-15));
  CHECK(nm.params.omega == 1.0);
  CHECK(nm.params.Omega == doctest::Approx(p.Omega_drive / nm.scale).epsilon(1e-14));
  // eps is half the full two-photon detuning.
  CHECK(nm.params.epsilon ==
        doctest::Approx(0.5 * detuning / nm.scale).epsilon(1e-14));
  CHECK(nm.params.g == doctest::Approx(d.g / nm.scale).epsilon(1e-14));

  // The scale stays sqrt(3) nu under the trap convention; only g moves.
  auto pt = sr88();
  pt.lb_convention = LbConvention::TrapMode;
  const auto nt = model_params_from_physical(pt, detuning);
  CHECK(nt.scale == nm.scale);
  CHECK(nt.params.Omega == nm.params.Omega);
  CHECK(nt.params.g / nm.params.g ==
        doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-13));
}

TEST_CASE("negative detuning passes through with its sign") {
  const auto nm = model_params_from_physical(sr88(), -kTwoPi * 10.0e3);
  CHECK(nm.params.epsilon < 0.0);
}

TEST_CASE("input validation") {
  auto p = sr88();
  p.nu = 0.0;
  CHECK_THROWS_AS(derive_trap(p), Error);

  p = sr88();
  p.mass_amu = -1.0;
  try {
    derive_trap(p);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }

  p = sr88();
  p.net_charge = 0;
  CHECK_THROWS_AS(validate(p), Error);

  p = sr88();
  p.Omega_drive = 0.0;
  CHECK_THROWS_AS(derive_trap(p), Error);

  p = sr88();
  p.Vd_slope = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(derive_trap(p), Error);
}

TEST_CASE("pinned SI constants") {
  CHECK(kElementaryCharge == 1.602176634e-19);
  CHECK(kVacuumPermittivity == 8.8541878128e-12);
  CHECK(kHbar == 1.054571817e-34);
  CHECK(kAmu == 1.66053906660e-27);
}
