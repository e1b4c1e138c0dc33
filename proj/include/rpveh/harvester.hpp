#pragma once

#include "rpveh/types.hpp"

namespace rpveh {

// ---------------------------------------------------------------------------
// Harvester description
// ---------------------------------------------------------------------------

// Electrical-side description of a resonant piezoelectric harvester.
// The mechanical lumped set {K, M, D, alpha} is derived on demand; the
// quality factor supplies the one scale that the electrical tuple alone
// does not pin down.
struct HarvesterParams {
  double delta_v_per_g;  // open-loop voltage scale, volts per g
  double rho;            // electromechanical coupling coefficient
  double f_res_hz;       // mechanical resonance frequency
  double c_p_farad;      // piezo output capacitance
  double q_factor;       // mechanical quality factor

  double omega_res() const { return 2.0 * kPi * f_res_hz; }

  // Throws ConfigError unless all parameters are strictly positive.
  void validate() const;
};

// Mechanical lumped model reconstructed from the electrical tuple, SI units.
struct MechanicalParams {
  double stiffness;     // K, N/m
  double mass;          // M, kg
  double damping;       // D, N*s/m
  double force_factor;  // alpha, N/V

  double series_c() const { return force_factor * force_factor / stiffness; }
  double series_l() const { return mass / (force_factor * force_factor); }
  double series_r() const { return damping / (force_factor * force_factor); }
};

// Reconstructs {K, M, D, alpha} from (delta, rho, omega_res, C_p, Q).
MechanicalParams derive_mechanical(const HarvesterParams& h);

// ---------------------------------------------------------------------------
// Closed-form phasor quantities
// ---------------------------------------------------------------------------

// Series equivalent output impedance R_p + jX_p. X_p is always negative.
Complex source_impedance(const HarvesterParams& h);

// Open-circuit voltage phasor for a drive of amplitude a_max (in g) at
// the resonance frequency.
Complex open_circuit_voltage(const HarvesterParams& h, double a_max_g);

struct OptimalImpedance {
  Complex series;   // conjugate of the source impedance
  double r_par;     // parallel-form resistance
  double x_par;     // parallel-form reactance (positive)
};

// Optimal load impedance in both series and parallel form. Intentionally
// independent of the drive amplitude.
OptimalImpedance optimal_impedance(const HarvesterParams& h);

// Maximum average extractable power at amplitude a_max (g).
double max_power(const HarvesterParams& h, double a_max_g);

struct OptimalGenerator {
  double v_opt;    // volts
  double phi_opt;  // radians, relative to the acceleration phasor
};

// Optimal load-generator amplitude and phase: (delta*A/2, 0).
OptimalGenerator optimal_generator(const HarvesterParams& h, double a_max_g);

}  // namespace rpveh
