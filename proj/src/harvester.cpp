#include "rpveh/harvester.hpp"

#include <cassert>
#include <cmath>

namespace rpveh {

void HarvesterParams::validate() const {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("harvester: ") + msg);
  };
  need(std::isfinite(delta_v_per_g) && delta_v_per_g > 0, "delta must be > 0");
  need(std::isfinite(rho) && rho > 0, "rho must be > 0");
  need(std::isfinite(f_res_hz) && f_res_hz > 0, "f_res must be > 0");
  need(std::isfinite(c_p_farad) && c_p_farad > 0, "c_p must be > 0");
  need(std::isfinite(q_factor) && q_factor > 0, "q_factor must be > 0");
}

MechanicalParams derive_mechanical(const HarvesterParams& h) {
  h.validate();
  const double w = h.omega_res();
  const double delta_si = h.delta_v_per_g / kGravity;  // V/(m/s^2)
  // M follows from requiring rho = w*D*C_p/alpha^2 with D = M*w/Q and
  // alpha = M/delta_si.
  const double mass = delta_si * delta_si * w * w * h.c_p_farad /
                      (h.q_factor * h.rho);
  MechanicalParams m;
  m.mass = mass;
  m.force_factor = mass / delta_si;
  m.stiffness = mass * w * w;
  m.damping = mass * w / h.q_factor;
  return m;
}

Complex source_impedance(const HarvesterParams& h) {
  h.validate();
  const double s = h.omega_res() * h.c_p_farad;
  const double r_p = h.rho / (s * (1.0 + h.rho * h.rho));
  return {r_p, -h.rho * r_p};
}

Complex open_circuit_voltage(const HarvesterParams& h, double a_max_g) {
  h.validate();
  if (a_max_g < 0) throw ConfigError("a_max must be >= 0");
  return h.delta_v_per_g * a_max_g / Complex(1.0, h.rho);
}

OptimalImpedance optimal_impedance(const HarvesterParams& h) {
  const Complex z_p = source_impedance(h);
  const double s = h.omega_res() * h.c_p_farad;
  OptimalImpedance opt;
  opt.series = std::conj(z_p);
  opt.r_par = h.rho / s;
  opt.x_par = 1.0 / s;
  return opt;
}

double max_power(const HarvesterParams& h, double a_max_g) {
  h.validate();
  if (a_max_g < 0) throw ConfigError("a_max must be >= 0");
  const double va = h.delta_v_per_g * a_max_g;
  const double p = va * va * h.omega_res() * h.c_p_farad / (8.0 * h.rho);
  // Mechanical form of the same expression; the two must agree.
  const MechanicalParams m = derive_mechanical(h);
  const double p_mech =
      va * va * m.force_factor * m.force_factor / (8.0 * m.damping);
  assert(p == 0.0 || std::abs(p - p_mech) <= 1e-12 * p);
  (void)p_mech;
  return p;
}

OptimalGenerator optimal_generator(const HarvesterParams& h, double a_max_g) {
  h.validate();
  if (a_max_g < 0) throw ConfigError("a_max must be >= 0");
  return {h.delta_v_per_g * a_max_g / 2.0, 0.0};
}

}  // namespace rpveh
