#include "rpveh/interface_circuit.hpp"

#include <cmath>

namespace rpveh {

ControllerParams ControllerParams::table1_defaults() {
  ControllerParams cp{};
  cp.r_m_ohm = 20.0;
  cp.c_x_farad = 1e-9;
  cp.r_x_ohm = 330e3;
  cp.r_y_ohm = 8e3;
  cp.r_f_ohm = 100e3;
  cp.r_a_ohm = 275e3;
  cp.r_b_ohm = 2e3;
  cp.r_p_ohm = 150e3;
  cp.r_q_ohm = 10e6;
  cp.v_supply = 5.0;
  cp.l_b_henry = 100e-3;
  cp.v_dc = 5.0;
  cp.v_n = 5.0;
  cp.dead_time_s = 1e-6;
  cp.aux = BlankingParts{};
  return cp;
}

void ControllerParams::validate() const {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("controller: ") + msg);
  };
  auto pos = [&](double v, const char* msg) {
    need(std::isfinite(v) && v > 0, msg);
  };
  pos(r_m_ohm, "r_m must be > 0");
  pos(c_x_farad, "c_x must be > 0");
  pos(r_x_ohm, "r_x must be > 0");
  pos(r_y_ohm, "r_y must be > 0");
  pos(r_f_ohm, "r_f must be > 0");
  pos(r_a_ohm, "r_a must be > 0");
  pos(r_b_ohm, "r_b must be > 0");
  need(std::isfinite(r_p_ohm) && r_p_ohm >= 0, "r_p must be >= 0");
  pos(r_q_ohm, "r_q must be > 0");
  pos(v_supply, "v_supply must be > 0");
  pos(l_b_henry, "l_b must be > 0");
  pos(v_dc, "v_dc must be > 0");
  pos(v_n, "v_n must be > 0");
  need(std::isfinite(dead_time_s) && dead_time_s >= 0,
       "dead_time must be >= 0");
}

std::vector<std::string> ControllerParams::approximation_warnings(
    double f_signal_hz, double warn_ratio, double silent_ratio) const {
  std::vector<std::string> out;
  const CornerFrequencies c = corner_frequencies(*this);
  auto check = [&](double f_corner, const char* name) {
    const double ratio = f_corner / f_signal_hz;
    if (ratio < warn_ratio)
      out.push_back(std::string(name) + " is only " +
                    std::to_string(ratio) +
                    "x the signal frequency; the simplified conditioning "
                    "transfer is unreliable here");
    else if (ratio < silent_ratio)
      out.push_back(std::string(name) + " is " + std::to_string(ratio) +
                    "x the signal frequency; the simplified conditioning "
                    "transfer carries a loose margin");
  };
  check(c.f_x_hz, "f_x");
  check(c.f_y_hz, "f_y");
  return out;
}

HysteresisThresholds hysteresis_thresholds(const ControllerParams& cp) {
  cp.validate();
  const double v_th = cp.r_p_ohm / cp.r_q_ohm * cp.v_supply;
  return {v_th, -v_th, 2.0 * v_th};
}

Complex conditioning_transfer(const ControllerParams& cp, double omega,
                              const Complex& i_load, const Complex& v_load,
                              ConditioningMode mode) {
  cp.validate();
  if (!(omega > 0)) throw ConfigError("omega must be > 0");
  const double beta = cp.r_b_ohm / (cp.r_a_ohm + cp.r_b_ohm);
  const Complex jw(0.0, omega);
  const Complex gain_i = -cp.r_f_ohm * cp.r_m_ohm / cp.r_y_ohm;
  if (mode == ConditioningMode::approximate) {
    const Complex gain_v = -jw * cp.r_f_ohm * cp.c_x_farad +
                           beta * (1.0 + cp.r_f_ohm / cp.r_y_ohm);
    return gain_i * i_load + gain_v * v_load;
  }
  const Complex z_x = cp.r_x_ohm + 1.0 / (jw * cp.c_x_farad);
  const Complex y_par = 1.0 / cp.r_y_ohm + 1.0 / z_x;
  const Complex gain_v =
      -cp.r_f_ohm / z_x + beta * (1.0 + cp.r_f_ohm * y_par);
  return gain_i * i_load + gain_v * v_load;
}

EmulatedLoad emulated_admittance(const ControllerParams& cp, double omega) {
  cp.validate();
  if (!(omega > 0)) throw ConfigError("omega must be > 0");
  EmulatedLoad out;
  out.r_e_ohm = (cp.r_a_ohm + cp.r_b_ohm) / cp.r_b_ohm *
                (cp.r_f_ohm * cp.r_m_ohm / (cp.r_f_ohm + cp.r_y_ohm));
  out.x_e_ohm = cp.r_m_ohm / (omega * cp.r_y_ohm * cp.c_x_farad);
  out.c_n_farad = -cp.c_x_farad * cp.r_y_ohm / cp.r_m_ohm;
  return out;
}

CornerFrequencies corner_frequencies(const ControllerParams& cp) {
  cp.validate();
  return {1.0 / (2.0 * kPi * cp.r_x_ohm * cp.c_x_farad),
          1.0 / (2.0 * kPi * cp.r_y_ohm * cp.c_x_farad)};
}

SizingReport size_controller(const HarvesterParams& h,
                             const PartialController& fixed,
                             double tolerance) {
  h.validate();
  if (!(tolerance >= 0)) throw ConfigError("sizing tolerance must be >= 0");
  const ControllerParams ref = ControllerParams::table1_defaults();
  ControllerParams cp = ref;
  auto take = [](std::optional<double> v, double fallback) {
    return v.value_or(fallback);
  };
  cp.r_m_ohm = take(fixed.r_m_ohm, ref.r_m_ohm);
  cp.c_x_farad = take(fixed.c_x_farad, ref.c_x_farad);
  cp.r_x_ohm = take(fixed.r_x_ohm, ref.r_x_ohm);
  cp.r_y_ohm = take(fixed.r_y_ohm, ref.r_y_ohm);
  cp.r_f_ohm = take(fixed.r_f_ohm, ref.r_f_ohm);
  cp.r_p_ohm = take(fixed.r_p_ohm, ref.r_p_ohm);
  cp.r_q_ohm = take(fixed.r_q_ohm, ref.r_q_ohm);
  cp.v_supply = take(fixed.v_supply, ref.v_supply);
  cp.l_b_henry = take(fixed.l_b_henry, ref.l_b_henry);
  cp.v_dc = take(fixed.v_dc, ref.v_dc);
  cp.v_n = take(fixed.v_n, ref.v_n);
  cp.dead_time_s = take(fixed.dead_time_s, ref.dead_time_s);

  SizingReport rep{};
  rep.r_e_target = h.rho / (h.omega_res() * h.c_p_farad);
  rep.c_n_target = -h.c_p_farad;

  // Negative-capacitance relation: R_y C_x / R_m = C_p. All three parts are
  // pinned or defaulted above, so this is a check.
  rep.c_n_achieved = -cp.c_x_farad * cp.r_y_ohm / cp.r_m_ohm;
  rep.c_n_rel_error =
      std::abs(rep.c_n_achieved - rep.c_n_target) / std::abs(rep.c_n_target);
  if (rep.c_n_rel_error > tolerance)
    throw SizingError(
        "R_y*C_x/R_m = C_p",
        "sizing: emulated capacitance " + std::to_string(-rep.c_n_achieved) +
            " F misses target " + std::to_string(h.c_p_farad) + " F by " +
            std::to_string(rep.c_n_rel_error * 100.0) +
            "% (tolerance " + std::to_string(tolerance * 100.0) + "%)");

  // Resistance relation: (R_a+R_b)/R_b * R_f R_m/(R_f+R_y) = R_e target.
  const double branch = cp.r_f_ohm * cp.r_m_ohm / (cp.r_f_ohm + cp.r_y_ohm);
  if (fixed.r_a_ohm && fixed.r_b_ohm) {
    cp.r_a_ohm = *fixed.r_a_ohm;
    cp.r_b_ohm = *fixed.r_b_ohm;
  } else {
    const double ratio = rep.r_e_target / branch;  // (R_a+R_b)/R_b
    if (!(ratio > 1.0))
      throw SizingError("(R_a+R_b)/R_b * R_f*R_m/(R_f+R_y) = R_e",
                        "sizing: target R_e " +
                            std::to_string(rep.r_e_target) +
                            " ohm needs a divider ratio <= 1; lower R_f*R_m "
                            "or raise the target");
    if (fixed.r_a_ohm) {
      cp.r_a_ohm = *fixed.r_a_ohm;
      cp.r_b_ohm = cp.r_a_ohm / (ratio - 1.0);
    } else {
      cp.r_b_ohm = take(fixed.r_b_ohm, ref.r_b_ohm);
      cp.r_a_ohm = cp.r_b_ohm * (ratio - 1.0);
    }
  }
  rep.r_e_achieved =
      (cp.r_a_ohm + cp.r_b_ohm) / cp.r_b_ohm * branch;
  rep.r_e_rel_error =
      std::abs(rep.r_e_achieved - rep.r_e_target) / rep.r_e_target;
  if (rep.r_e_rel_error > tolerance)
    throw SizingError(
        "(R_a+R_b)/R_b * R_f*R_m/(R_f+R_y) = R_e",
        "sizing: emulated resistance " + std::to_string(rep.r_e_achieved) +
            " ohm misses target " + std::to_string(rep.r_e_target) +
            " ohm by " + std::to_string(rep.r_e_rel_error * 100.0) +
            "% (tolerance " + std::to_string(tolerance * 100.0) + "%)");

  cp.validate();
  rep.params = cp;
  return rep;
}

}  // namespace rpveh
