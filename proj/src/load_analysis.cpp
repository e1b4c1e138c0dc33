#include "rpveh/load_analysis.hpp"

#include <array>
#include <cmath>

namespace rpveh {

double psi_z(const HarvesterParams& h, double r_load, double x_load) {
  const double s = h.omega_res() * h.c_p_farad;
  return s * (1.0 + h.rho * h.rho) / h.rho *
         (r_load * x_load * x_load / (r_load * r_load + x_load * x_load));
}

double psi_n(double rho, double r_n, double x_n) {
  return (1.0 + rho * rho) * r_n * x_n /
         (r_n * r_n * rho * rho + x_n * x_n);
}

double psi_v(double delta_a, double v_load, double phi_load) {
  return v_load / delta_a * std::cos(phi_load);
}

double power_impedance_load(const HarvesterParams& h, double a_max_g,
                            double r_load, double x_load) {
  h.validate();
  if (a_max_g < 0) throw ConfigError("a_max must be >= 0");
  if (!(r_load > 0))
    throw ConfigError("r_load must be > 0 (passive interface)");
  if (x_load == 0) throw ConfigError("x_load must be nonzero");
  const double s = h.omega_res() * h.c_p_farad;
  const double va = h.delta_v_per_g * a_max_g;
  const double pz = psi_z(h, r_load, x_load);
  const double skew = pz * r_load / x_load - h.rho;
  return va * va * s / (2.0 * h.rho) * pz /
         ((1.0 + pz) * (1.0 + pz) + skew * skew);
}

double normalized_power_impedance(double rho, double r_n, double x_n) {
  if (!(rho > 0) || !(r_n > 0) || !(x_n > 0))
    throw ConfigError("normalized impedance point requires rho, r_n, x_n > 0");
  const double pn = psi_n(rho, r_n, x_n);
  const double a = 1.0 + pn * x_n;
  const double b = pn * r_n - 1.0;
  return 4.0 * pn * x_n / (a * a + rho * rho * b * b);
}

GeneratorPower power_generator_load(const HarvesterParams& h, double a_max_g,
                                    double v_load, double phi_load) {
  h.validate();
  if (a_max_g < 0) throw ConfigError("a_max must be >= 0");
  if (v_load < 0) throw ConfigError("v_load must be >= 0");
  const double s = h.omega_res() * h.c_p_farad;
  const double va = h.delta_v_per_g * a_max_g;
  // Expanded form of the average-power expression; finite for any phase.
  const double p =
      s / (2.0 * h.rho) * (va * v_load * std::cos(phi_load) - v_load * v_load);
  const Complex v_ph = std::polar(v_load, phi_load);
  const Complex i_load =
      (open_circuit_voltage(h, a_max_g) - v_ph) / source_impedance(h);
  return {p, i_load};
}

double normalized_power_generator(double v_n, double phi_n) {
  if (v_n < 0) throw ConfigError("v_n must be >= 0");
  return 2.0 * v_n * std::cos(phi_n) - v_n * v_n;
}

FixedLoadPowers fixed_load_powers(const HarvesterParams& h, double a_max_0_g,
                                  double a_max_g) {
  if (!(a_max_0_g > 0) || !(a_max_g > 0))
    throw ConfigError("amplitudes must be > 0");
  FixedLoadPowers out;
  out.p_max_0 = max_power(h, a_max_0_g);
  out.p_load_z0 = max_power(h, a_max_g);
  const double r0 = a_max_0_g / a_max_g;
  out.p_load_v0 = out.p_load_z0 * 2.0 * r0 * (1.0 - 0.5 * r0);
  return out;
}

double lambda_waste(double a_max_0_g, double a_max_g) {
  if (!(a_max_0_g > 0)) throw ConfigError("a_max_0 must be > 0");
  if (!(a_max_g > 0)) throw ConfigError("a_max must be > 0");
  const double r0 = a_max_0_g / a_max_g;
  return (1.0 - 2.0 * r0 * (1.0 - 0.5 * r0)) * 100.0;
}

// ---------------------------------------------------------------------------
// Complex nodal oracle
// ---------------------------------------------------------------------------

namespace {

// Gaussian elimination with partial pivoting on an n x n complex system.
template <std::size_t N>
std::array<Complex, N> solve_dense(std::array<std::array<Complex, N>, N> a,
                                   std::array<Complex, N> b) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300)
      throw SingularNetworkError("nodal solve: singular network matrix");
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const Complex f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<Complex, N> x{};
  for (std::size_t ri = N; ri-- > 0;) {
    Complex acc = b[ri];
    for (std::size_t c = ri + 1; c < N; ++c) acc -= a[ri][c] * x[c];
    x[ri] = acc / a[ri][ri];
  }
  return x;
}

}  // namespace

NodalSolution phasor_nodal_oracle(const HarvesterParams& h, double a_max_g,
                                  const LoadSpec& load) {
  h.validate();
  if (a_max_g < 0) throw ConfigError("a_max must be >= 0");
  const MechanicalParams m = derive_mechanical(h);
  const double w = h.omega_res();
  const Complex jw(0.0, w);
  // Series branch of the equivalent circuit.
  const Complex z_series = m.series_r() + jw * m.series_l() +
                           1.0 / (jw * m.series_c());
  const Complex y_series = 1.0 / z_series;
  const Complex y_cp = jw * h.c_p_farad;
  const Complex e_src = h.delta_v_per_g * a_max_g;  // phase 0 vs acceleration

  if (const auto* zl = std::get_if<ParallelImpedance>(&load)) {
    if (!(zl->r_load > 0) || zl->x_load == 0)
      throw ConfigError("oracle: invalid impedance load");
    const Complex y_load = 1.0 / zl->r_load + 1.0 / Complex(0.0, zl->x_load);
    // Unknowns: v_a (source node), v_t (terminal), i_src.
    std::array<std::array<Complex, 3>, 3> a{};
    std::array<Complex, 3> rhs{};
    a[0] = {y_series, -y_series, Complex(1.0)};           // KCL at source node
    a[1] = {-y_series, y_series + y_cp + y_load, Complex(0.0)};  // KCL at v_t
    a[2] = {Complex(1.0), Complex(0.0), Complex(0.0)};    // v_a = e_src
    rhs[2] = e_src;
    const auto x = solve_dense<3>(a, rhs);
    const Complex v_t = x[1];
    const Complex i_load = v_t * y_load;
    return {0.5 * std::real(v_t * std::conj(i_load)), v_t, i_load};
  }

  const auto& gen = std::get<VoltageGenerator>(load);
  const Complex v_gen = std::polar(gen.v_load, gen.phi_load);
  // Unknowns: v_a, v_t, i_src, i_gen (current into the generator).
  std::array<std::array<Complex, 4>, 4> a{};
  std::array<Complex, 4> rhs{};
  a[0] = {y_series, -y_series, Complex(1.0), Complex(0.0)};
  a[1] = {-y_series, y_series + y_cp, Complex(0.0), Complex(1.0)};
  a[2] = {Complex(1.0), Complex(0.0), Complex(0.0), Complex(0.0)};
  a[3] = {Complex(0.0), Complex(1.0), Complex(0.0), Complex(0.0)};
  rhs[2] = e_src;
  rhs[3] = v_gen;
  const auto x = solve_dense<4>(a, rhs);
  const Complex v_t = x[1];
  const Complex i_load = x[3];
  return {0.5 * std::real(v_t * std::conj(i_load)), v_t, i_load};
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

std::vector<double> AxisSpec::values() const {
  if (points < 2) throw ConfigError("axis needs at least 2 points");
  if (!(hi > lo)) throw ConfigError("axis range must be increasing");
  if (log_scale && !(lo > 0))
    throw ConfigError("log axis requires positive bounds");
  std::vector<double> v(points);
  if (log_scale) {
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < points; ++i)
      v[i] = std::pow(10.0, llo + (lhi - llo) * i / (points - 1));
  } else {
    for (int i = 0; i < points; ++i)
      v[i] = lo + (hi - lo) * i / (points - 1);
  }
  return v;
}

GridData sweep_impedance_grid(double rho, const AxisSpec& r_axis,
                              const AxisSpec& x_axis) {
  GridData g;
  g.axis1 = r_axis.values();
  g.axis2 = x_axis.values();
  g.meta["axis1"] = "R_N";
  g.meta["axis2"] = "X_N";
  g.meta["value"] = "P_Z_load/P_max";
  g.meta["rho"] = format_double(rho);
  g.values.reserve(g.axis1.size() * g.axis2.size());
  for (double rn : g.axis1)
    for (double xn : g.axis2)
      g.values.push_back(normalized_power_impedance(rho, rn, xn));
  return g;
}

GridData sweep_generator_grid(const AxisSpec& v_axis,
                              const AxisSpec& phi_axis) {
  GridData g;
  g.axis1 = v_axis.values();
  g.axis2 = phi_axis.values();
  g.meta["axis1"] = "V_N";
  g.meta["axis2"] = "Phi_N";
  g.meta["value"] = "P_V_load/P_max";
  g.values.reserve(g.axis1.size() * g.axis2.size());
  for (double vn : g.axis1)
    for (double pn : g.axis2)
      g.values.push_back(normalized_power_generator(vn, pn));
  return g;
}

RatioCurve sweep_amplitude_ratio(const AxisSpec& ratio_axis) {
  RatioCurve c;
  c.ratio = ratio_axis.values();
  for (double r : c.ratio) {
    if (!(r > 0)) throw ConfigError("amplitude ratio must be > 0");
    c.p_max_norm.push_back(r * r);
    c.p_load_z0_norm.push_back(r * r);
    c.p_load_v0_norm.push_back(r * r * (2.0 / r) * (1.0 - 0.5 / r));
    c.lambda_waste_pct.push_back(lambda_waste(1.0, r));
  }
  return c;
}

}  // namespace rpveh
