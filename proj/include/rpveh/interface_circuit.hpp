#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rpveh/harvester.hpp"
#include "rpveh/types.hpp"

namespace rpveh {

// ---------------------------------------------------------------------------
// Controller description
// ---------------------------------------------------------------------------

// Passive parts of the blanking-time circuit, retained for completeness.
struct BlankingParts {
  double c_b_farad = 100e-9;
  double r_tp_ohm = 30e3;
  double r_tn_ohm = 100e3;
  double c_dt_farad = 100e-12;
};

// Component values of the analog control unit and converter.
struct ControllerParams {
  double r_m_ohm;     // current-sense resistor
  double c_x_farad;   // conditioning capacitor
  double r_x_ohm;     // series resistor of the C_x branch
  double r_y_ohm;     // current-channel input resistor
  double r_f_ohm;     // op-amp feedback resistor
  double r_a_ohm;     // voltage-divider upper resistor
  double r_b_ohm;     // voltage-divider lower resistor
  double r_p_ohm;     // comparator positive-feedback resistor
  double r_q_ohm;     // comparator feedback-return resistor
  double v_supply;    // V+, with V- = -V+
  double l_b_henry;   // boost inductor
  double v_dc;        // positive DC rail
  double v_n;         // negative DC rail magnitude
  double dead_time_s; // switch blanking interval
  BlankingParts aux;

  // Reference design values (prototype component list).
  static ControllerParams table1_defaults();

  void validate() const;

  // Messages about how well the low-frequency approximation holds at
  // f_signal; empty when both corner ratios are >= silent_ratio, strongly
  // worded below warn_ratio.
  std::vector<std::string> approximation_warnings(double f_signal_hz,
                                                  double warn_ratio = 3.0,
                                                  double silent_ratio = 10.0)
      const;
};

// Load emulated at the converter input terminals.
struct EmulatedLoad {
  double r_e_ohm;    // parallel resistance
  double x_e_ohm;    // parallel reactance at omega (positive)
  double c_n_farad;  // equivalent negative capacitance (frequency-independent)
};

// ---------------------------------------------------------------------------
// Controller mathematics
// ---------------------------------------------------------------------------

struct HysteresisThresholds {
  double v_th;       // upper threshold
  double v_tl;       // lower threshold (= -v_th)
  double delta_v_t;  // band width
};

HysteresisThresholds hysteresis_thresholds(const ControllerParams& cp);

enum class ConditioningMode { exact, approximate };

// Conditioning-stage output phasor for given load current/voltage phasors.
// The exact mode evaluates the full op-amp transfer with the series R_x-C_x
// branch; the approximate mode is its low-frequency limit.
Complex conditioning_transfer(const ControllerParams& cp, double omega,
                              const Complex& i_load, const Complex& v_load,
                              ConditioningMode mode);

// Admittance the controller makes the converter emulate (low-frequency
// form): parallel R_e with negative capacitance C_n. X_e depends on omega;
// C_n does not.
EmulatedLoad emulated_admittance(const ControllerParams& cp, double omega);

struct CornerFrequencies {
  double f_x_hz;  // 1/(2 pi R_x C_x)
  double f_y_hz;  // 1/(2 pi R_y C_x)
};

CornerFrequencies corner_frequencies(const ControllerParams& cp);

// ---------------------------------------------------------------------------
// Sizing against a target harvester
// ---------------------------------------------------------------------------

// Fields left unset fall back to the reference design values.
struct PartialController {
  std::optional<double> r_m_ohm, c_x_farad, r_x_ohm, r_y_ohm, r_f_ohm;
  std::optional<double> r_a_ohm, r_b_ohm, r_p_ohm, r_q_ohm;
  std::optional<double> v_supply, l_b_henry, v_dc, v_n, dead_time_s;
};

struct SizingReport {
  ControllerParams params;
  double r_e_target;     // rho/(omega_res C_p)
  double r_e_achieved;
  double c_n_target;     // -C_p
  double c_n_achieved;
  double r_e_rel_error;
  double c_n_rel_error;
};

// Chooses the divider ratio R_a/R_b so the emulated resistance matches the
// harvester optimum, and checks the negative-capacitance relation
// R_y C_x / R_m = C_p against `tolerance`. Components pinned in `fixed` are
// never altered; pinning both r_a and r_b turns the resistance relation into
// a check as well. Throws SizingError naming the violated relation.
SizingReport size_controller(const HarvesterParams& h,
                             const PartialController& fixed,
                             double tolerance = 0.02);

}  // namespace rpveh
