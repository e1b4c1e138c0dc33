#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rpveh/harvester.hpp"
#include "rpveh/interface_circuit.hpp"
#include "rpveh/load_analysis.hpp"
#include "rpveh/types.hpp"

namespace rpveh {

// ---------------------------------------------------------------------------
// Acceleration program
// ---------------------------------------------------------------------------

struct AccelSegment {
  double duration_s;   // > 0
  double amplitude_g;  // >= 0
};

// Piecewise-constant amplitude envelope on a fixed-frequency sine drive.
// The sine phase is continuous across segment boundaries.
struct AccelProfile {
  double drive_freq_hz = 0;
  std::vector<AccelSegment> segments;

  static AccelProfile constant(double f_hz, double amp_g, double duration_s);
  static AccelProfile step(double f_hz, double amp0_g, double amp1_g,
                           double t_step_s, double t_end_s);
  static AccelProfile periodic_square(double f_hz, double amp_lo_g,
                                      double amp_hi_g, double period_s,
                                      double t_end_s);

  void validate() const;
  double total_duration() const;
  double amplitude_at(double t) const;
  // Times at which the amplitude actually changes value.
  std::vector<double> change_times() const;
};

// ---------------------------------------------------------------------------
// Simulation configuration and results
// ---------------------------------------------------------------------------

enum class Fidelity { behavioral, switched };

struct SimConfig {
  double dt = 2e-6;
  double t_end = 0;  // 0: run for the profile duration
  Fidelity fidelity = Fidelity::behavioral;
  int record_decimation = 50;
  std::optional<double> q_override;
  // Switched-mode conditioning realization. `approximate` tracks the
  // simplified transfer through a band-limited differentiator whose corner
  // defaults to the drive frequency (0 = use drive frequency); `exact`
  // integrates the full op-amp filter state.
  ConditioningMode conditioning = ConditioningMode::approximate;
  double deriv_corner_hz = 0;
  double diode_drop_v = 0;
  int avg_window_periods = 10;
};

struct Traces {
  std::vector<double> t, accel_g, v_load, i_load, p_dc, x, x_dot;
};

// Per drive period: trailing statistics accumulated at full step rate.
struct PeriodSample {
  double t_end;
  double p_avg;       // average p_dc over the period
  Complex v_phasor;   // fundamental of v_load over the period
  Complex i_phasor;   // fundamental of i_load over the period
  // Energy ledger (behavioral mode): input, damper and load energies over
  // the period, and stored energy at the period end.
  double e_in = 0, e_damper = 0, e_load = 0, stored_end = 0;
};

struct SimResult {
  Traces traces;
  std::vector<PeriodSample> periods;
  std::vector<double> events;  // amplitude-change times
  double drive_freq_hz = 0;
  std::vector<std::string> warnings;
  // Switched-mode diagnostics.
  double min_conduction_interval = 0;
  long switch_count = 0;
  double max_tracking_error = 0;  // max |i_load - i_ref| over the last window
  double max_ve_excursion = 0;    // max |v_e| beyond the band outside dead time

  double avg_power(int trailing_periods = 10) const;
  Complex v_phasor(int trailing_periods = 10) const;
  Complex i_phasor(int trailing_periods = 10) const;
  // arg(V) - arg(I), wrapped to (-pi, pi]; positive = current lags voltage.
  double phase_lag(int trailing_periods = 10) const;
};

// First time after the last amplitude-change event at which the per-period
// average power stays within `fraction` of its final value; 0 when it never
// leaves the band. Empty when the profile has no change event.
std::optional<double> settle_time(const SimResult& result,
                                  double fraction = 0.05);

// Emulated (R_e, C_n) recovered from the trailing steady-state phasors by
// quadrature demodulation.
EmulatedLoad measure_emulated_load(const SimResult& result,
                                   int trailing_periods = 10);

// ---------------------------------------------------------------------------
// Simulators
// ---------------------------------------------------------------------------

using BehavioralLoad =
    std::variant<ParallelImpedance, VoltageGenerator, EmulatedLoad>;

// Ideal-load simulation: mechanical resonator + C_p node + linear load
// (parallel R with a reactance realized as a capacitance, possibly negative)
// or a forced voltage generator.
SimResult simulate_behavioral(const HarvesterParams& h,
                              const BehavioralLoad& load,
                              const AccelProfile& profile,
                              const SimConfig& cfg);

// Switched simulation: hysteretic current control of the boost leg between
// the +-DC rails, with dead time and diode freewheel.
SimResult simulate_switched(const HarvesterParams& h,
                            const ControllerParams& cp,
                            const AccelProfile& profile, const SimConfig& cfg);

// Fixed (amplitude, phase) generator run; convenience over
// simulate_behavioral with a VoltageGenerator load.
SimResult run_fixed_generator(const HarvesterParams& h, double v_fixed,
                              double phi_fixed, const AccelProfile& profile,
                              const SimConfig& cfg);

// Generator-load simulation with a callback fired at every completed drive
// period; the callback may retune the generator amplitude/phase in place.
// Backs the perturb-and-observe baseline.
SimResult simulate_generator_tracked(
    const HarvesterParams& h, const AccelProfile& profile,
    const SimConfig& cfg, double v0, double phi0,
    const std::function<void(int period_index,
                             const std::vector<PeriodSample>& periods,
                             double& v_amp, double& phi)>& on_period);

// Bisects on the quality factor until the matched-load 0 -> 1 g step
// response settles (at `fraction`) in `target_settle_s`.
double calibrate_q(const HarvesterParams& h, double target_settle_s = 0.1,
                   double fraction = 0.05, double q_lo = 2.0,
                   double q_hi = 200.0, int iterations = 24);

}  // namespace rpveh
