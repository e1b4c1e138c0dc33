#include "rpveh/mppt.hpp"

#include <cmath>

namespace rpveh {

PnoResult run_pno_2d(const HarvesterParams& h, const AccelProfile& profile,
                     const PnoConfig& mppt, const SimConfig& cfg) {
  if (mppt.dwell_periods < 1 || mppt.measure_periods < 1 ||
      mppt.measure_periods > mppt.dwell_periods)
    throw ConfigError("pno: need 1 <= measure_periods <= dwell_periods");
  if (mppt.dv < 0 || mppt.dphi < 0)
    throw ConfigError("pno: perturbation sizes must be >= 0");

  PnoResult result;
  result.degenerate = mppt.dv == 0 && mppt.dphi == 0;

  // Decisions are only meaningful once the transient from the previous
  // perturbation has died out.
  const MechanicalParams m = derive_mechanical(h);
  const double tau_mech = 2.0 * m.mass / m.damping;
  const double dwell_s = mppt.dwell_periods / profile.drive_freq_hz;
  std::vector<std::string> pre_warnings;
  if (dwell_s < 3.0 * tau_mech)
    pre_warnings.push_back(
        "pno: dwell shorter than 3 mechanical time constants; decisions are "
        "unreliable");

  int axis = 0;  // 0: amplitude, 1: phase
  double dir[2] = {1.0, 1.0};
  bool have_prev = false;
  double p_prev = 0;

  auto on_period = [&](int period_index,
                       const std::vector<PeriodSample>& periods, double& v,
                       double& phi) {
    if (period_index % mppt.dwell_periods != 0) return;
    double p = 0;
    for (int k = 0; k < mppt.measure_periods; ++k)
      p += periods[periods.size() - 1 - k].p_avg;
    p /= mppt.measure_periods;

    if (!have_prev) {
      have_prev = true;
    } else {
      if (p < p_prev) dir[axis] = -dir[axis];  // previous move lost power
      axis = 1 - axis;
    }
    p_prev = p;
    if (axis == 0)
      v = std::max(0.0, v + dir[0] * mppt.dv);
    else
      phi += dir[1] * mppt.dphi;
    result.trajectory.push_back(
        {periods.back().t_end, v, phi, p});
  };

  result.sim = simulate_generator_tracked(h, profile, cfg, mppt.v_start,
                                          mppt.phi_start, on_period);
  for (auto& w : pre_warnings) result.sim.warnings.push_back(std::move(w));
  if (result.degenerate)
    result.sim.warnings.push_back(
        "pno: zero perturbation sizes; the operating point never moves");
  return result;
}

}  // namespace rpveh
