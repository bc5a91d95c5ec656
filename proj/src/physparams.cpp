#include "tqr/physparams.hpp"

#include <cmath>

namespace tqr {

void validate(const PhysicalIonParams& p) {
  auto fail = [](const char* msg) {
    throw Error(ErrorCode::InvalidArgument, msg);
  };
  if (!(p.mass_amu > 0.0) || !std::isfinite(p.mass_amu))
    fail("ion mass must be positive");
  if (p.net_charge < 1) fail("net charge must be at least 1");
  if (!(p.nu > 0.0) || !std::isfinite(p.nu))
    fail("trap frequency nu must be positive");
  if (!(p.Omega_drive > 0.0) || !std::isfinite(p.Omega_drive))
    fail("Rabi frequency must be positive");
  if (!std::isfinite(p.Vd_slope)) fail("dipolar slope must be finite");
}

DerivedTrapQuantities derive_trap(const PhysicalIonParams& p) {
  validate(p);
  const double mass = p.mass_amu * kAmu;
  const double charge = p.net_charge * kElementaryCharge;
  // Force balance between Coulomb repulsion and the axial confinement
  // puts each ion at s from the center, with s^3 proportional to 1/nu^2.
  const double s3 = charge * charge /
                    (16.0 * M_PI * kVacuumPermittivity * mass * p.nu * p.nu);
  DerivedTrapQuantities out;
  out.l0 = 2.0 * std::cbrt(s3);
  out.omega_breathing = std::sqrt(3.0) * p.nu;
  const double omega_ref =
      p.lb_convention == LbConvention::BreathingMode ? out.omega_breathing
                                                     : p.nu;
  out.l_b = std::sqrt(kHbar / (2.0 * mass * omega_ref));
  out.g = out.l_b * std::fabs(p.Vd_slope) / 4.0;
  out.g_c = std::sqrt(omega_ref * p.Omega_drive);
  out.ratio = out.g / out.g_c;
  return out;
}

NormalizedModel model_params_from_physical(const PhysicalIonParams& p,
                                           double detuning) {
  validate(p);
  if (!std::isfinite(detuning))
    throw Error(ErrorCode::InvalidArgument, "detuning must be finite");
  const DerivedTrapQuantities trap = derive_trap(p);
  NormalizedModel out;
  out.scale = trap.omega_breathing;
  out.params.omega = 1.0;
  out.params.Omega = p.Omega_drive / out.scale;
  out.params.epsilon = 0.5 * detuning / out.scale;
  out.params.g = trap.g / out.scale;
  return out;
}

}  // namespace tqr
