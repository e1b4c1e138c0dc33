#pragma once

#include <variant>
#include <vector>

#include "rpveh/harvester.hpp"
#include "rpveh/table.hpp"
#include "rpveh/types.hpp"

namespace rpveh {

// ---------------------------------------------------------------------------
// Load descriptions
// ---------------------------------------------------------------------------

// Parallel R || jX connected across the harvester terminals.
struct ParallelImpedance {
  double r_load;  // ohms, > 0
  double x_load;  // ohms, != 0 (positive = inductive-like)
};

// Ideal sinusoidal generator V*sin(w*t + phi) forced across the terminals.
struct VoltageGenerator {
  double v_load;    // volts, >= 0
  double phi_load;  // radians, relative to the acceleration phasor
};

using LoadSpec = std::variant<ParallelImpedance, VoltageGenerator>;

// Normalized operating point (R_N, X_N) or (V_N, Phi_N).
struct NormalizedPoint {
  double r_n = 0;
  double x_n = 0;
  double v_n = 0;
  double phi_n = 0;
};

// Intermediates of the closed-form power expressions, exposed for testing.
double psi_z(const HarvesterParams& h, double r_load, double x_load);
double psi_n(double rho, double r_n, double x_n);
double psi_v(double delta_a, double v_load, double phi_load);

// ---------------------------------------------------------------------------
// Closed-form powers
// ---------------------------------------------------------------------------

// Average power into a parallel R||X load. Throws ConfigError for
// r_load <= 0 or x_load == 0.
double power_impedance_load(const HarvesterParams& h, double a_max_g,
                            double r_load, double x_load);

// P_Z-load / P_max as a function of rho and the normalized load.
// In (0, 1]; equals 1 iff (r_n, x_n) == (1, 1).
double normalized_power_impedance(double rho, double r_n, double x_n);

struct GeneratorPower {
  double p;        // watts; negative means power flows back into the harvester
  Complex i_load;  // load-current phasor (into the generator)
};

// Average power into a load generator plus the load-current phasor.
GeneratorPower power_generator_load(const HarvesterParams& h, double a_max_g,
                                    double v_load, double phi_load);

// P_V-load / P_max; depends only on the normalized generator, not on the
// harvester. Evaluated in the expanded form 2*v_n*cos(phi_n) - v_n^2, which
// is finite for any phi_n including +-pi/2.
double normalized_power_generator(double v_n, double phi_n);

// ---------------------------------------------------------------------------
// Fixed-load comparison (impedance vs generator under amplitude changes)
// ---------------------------------------------------------------------------

struct FixedLoadPowers {
  double p_load_z0;  // fixed optimal impedance at the new amplitude
  double p_load_v0;  // fixed optimal generator (tuned at a_max_0)
  double p_max_0;    // maximum power at the tuning amplitude
};

FixedLoadPowers fixed_load_powers(const HarvesterParams& h, double a_max_0_g,
                                  double a_max_g);

// Percentage of power wasted by the un-adapted generator relative to the
// un-adapted impedance when the amplitude moves from a_max_0 to a_max.
// Returns the raw value: 0 at a_max == a_max_0, 100 at a_max == a_max_0/2,
// and above 100 for smaller amplitudes (reverse power flow).
double lambda_waste(double a_max_0_g, double a_max_g);

// ---------------------------------------------------------------------------
// Independent oracle: complex nodal solve of the equivalent circuit
// ---------------------------------------------------------------------------

struct NodalSolution {
  double p;        // average power into the load
  Complex v_load;  // terminal-voltage phasor
  Complex i_load;  // load-current phasor
};

// Solves the series {C_K, L_M, R_D} branch + parallel C_p + load network by
// complex MNA at the resonance frequency using the derived mechanical set.
// No closed-form power expression is used anywhere on this path.
NodalSolution phasor_nodal_oracle(const HarvesterParams& h, double a_max_g,
                                  const LoadSpec& load);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct AxisSpec {
  double lo;
  double hi;
  int points;
  bool log_scale;

  std::vector<double> values() const;  // validates: monotone, >= 2 points
};

// Normalized impedance-load power over an (R_N, X_N) grid at fixed rho.
GridData sweep_impedance_grid(double rho, const AxisSpec& r_axis,
                              const AxisSpec& x_axis);

// Normalized generator-load power over a (V_N, Phi_N) grid.
GridData sweep_generator_grid(const AxisSpec& v_axis, const AxisSpec& phi_axis);

// Fixed-load power curves vs amplitude ratio a_max/a_max_0 (normalized to
// the tuning-point maximum power) plus lambda_waste.
struct RatioCurve {
  std::vector<double> ratio;
  std::vector<double> p_max_norm;
  std::vector<double> p_load_z0_norm;
  std::vector<double> p_load_v0_norm;
  std::vector<double> lambda_waste_pct;
};

RatioCurve sweep_amplitude_ratio(const AxisSpec& ratio_axis);

}  // namespace rpveh
