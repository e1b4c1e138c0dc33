#include <doctest.h>

#include <cmath>

#include "rpveh/harvester.hpp"
#include "rpveh/load_analysis.hpp"

using namespace rpveh;

namespace {

HarvesterParams reference_harvester() {
  return {8.0, 0.9, 137.6, 405e-9, 23.5};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("source impedance matches the closed form") {
  const HarvesterParams h = reference_harvester();
  const Complex z = source_impedance(h);
  // Frozen from an independent evaluation of the series R_p + jX_p form.
  CHECK(rel(z.real(), 1420.072800154676) < 1e-12);
  CHECK(rel(z.imag(), -1278.0655201392085) < 1e-12);
  CHECK(z.imag() < 0.0);
}

TEST_CASE("source impedance limits") {
  HarvesterParams h = reference_harvester();
  h.rho = 1e-9;
  const Complex z = source_impedance(h);
  CHECK(std::abs(z.real()) < 1e-2);
  CHECK(std::abs(z.imag()) < 1e-6);

  h.rho = 1.0;  // R_p = -X_p = 1/(2 w C_p)
  const Complex z1 = source_impedance(h);
  const double half = 1.0 / (2.0 * h.omega_res() * h.c_p_farad);
  CHECK(rel(z1.real(), half) < 1e-14);
  CHECK(z1.real() == -z1.imag());
}

TEST_CASE("open-circuit voltage") {
  const HarvesterParams h = reference_harvester();
  const Complex v = open_circuit_voltage(h, 1.0);
  CHECK(rel(std::abs(v), 5.946353169977331) < 1e-12);
  CHECK(rel(std::arg(v), -std::atan(0.9)) < 1e-12);

  CHECK(std::abs(open_circuit_voltage(h, 0.0)) == 0.0);

  HarvesterParams h0 = h;
  h0.rho = 1e-14;
  const Complex v0 = open_circuit_voltage(h0, 1.0);
  CHECK(rel(v0.real(), 8.0) < 1e-9);
  CHECK(std::abs(std::arg(v0)) < 1e-12);
}

TEST_CASE("optimal impedance, both forms") {
  const HarvesterParams h = reference_harvester();
  const OptimalImpedance opt = optimal_impedance(h);

  // Identified values reported for this harvester.
  CHECK(rel(opt.r_par, 2570.0) < 0.005);
  CHECK(rel(opt.x_par, 2856.0) < 0.005);
  CHECK(rel(opt.r_par, 2570.331768279964) < 1e-12);
  CHECK(rel(opt.x_par, 2855.9241869777375) < 1e-12);

  // Series form is the exact conjugate of the source impedance.
  const Complex z_p = source_impedance(h);
  CHECK(opt.series.real() == z_p.real());
  CHECK(opt.series.imag() == -z_p.imag());

  // Parallel and series forms are the same complex impedance.
  const Complex z_from_par =
      1.0 / (1.0 / opt.r_par + 1.0 / Complex(0.0, opt.x_par));
  CHECK(std::abs(z_from_par - opt.series) / std::abs(opt.series) < 1e-12);

  // rho = 1 makes both parallel elements equal.
  HarvesterParams h1 = h;
  h1.rho = 1.0;
  const OptimalImpedance opt1 = optimal_impedance(h1);
  CHECK(opt1.r_par == opt1.x_par);

  // No amplitude argument exists, so the result cannot depend on it.
  const OptimalImpedance again = optimal_impedance(h);
  CHECK(again.r_par == opt.r_par);
  CHECK(again.series == opt.series);
}

TEST_CASE("maximum power") {
  const HarvesterParams h = reference_harvester();
  const double p = max_power(h, 1.0);
  CHECK(rel(p, 3.1e-3) < 0.02);                  // reported value
  CHECK(rel(p, 0.0031124386737644795) < 1e-12);  // frozen exact
  CHECK(max_power(h, 0.0) == 0.0);
  CHECK(rel(max_power(h, 2.0), 4.0 * p) < 1e-12);
}

TEST_CASE("optimal generator") {
  const HarvesterParams h = reference_harvester();
  const OptimalGenerator g = optimal_generator(h, 1.0);
  CHECK(g.v_opt == 4.0);
  CHECK(g.phi_opt == 0.0);
  CHECK(optimal_generator(h, 0.0).v_opt == 0.0);
  CHECK(optimal_generator(h, 1.25).v_opt ==
        doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("derived mechanical set satisfies the defining identities") {
  const HarvesterParams h = reference_harvester();
  const MechanicalParams m = derive_mechanical(h);
  const double w = h.omega_res();
  CHECK(rel(h.q_factor, m.stiffness / (w * m.damping)) < 1e-12);
  CHECK(rel(h.rho, w * m.damping * h.c_p_farad /
                       (m.force_factor * m.force_factor)) < 1e-12);
  CHECK(rel(m.series_r(), h.rho / (w * h.c_p_farad)) < 1e-12);
  CHECK(rel(w, std::sqrt(m.stiffness / m.mass)) < 1e-12);
}

TEST_CASE("matched-load power equals the maximum (transfer theorem)") {
  const HarvesterParams h = reference_harvester();
  const OptimalImpedance opt = optimal_impedance(h);
  const double p_matched = power_impedance_load(h, 1.0, opt.r_par, opt.x_par);
  CHECK(rel(p_matched, max_power(h, 1.0)) < 1e-9);
}

TEST_CASE("voltage divider at the optimum is real and equals delta*A/2") {
  const HarvesterParams h = reference_harvester();
  const Complex z_p = source_impedance(h);
  const Complex z_opt = optimal_impedance(h).series;
  const Complex v = open_circuit_voltage(h, 1.0) * z_opt / (z_p + z_opt);
  CHECK(std::abs(v.imag()) < 1e-9 * std::abs(v));
  CHECK(rel(v.real(), 4.0) < 1e-9);
}

TEST_CASE("parameter validation") {
  HarvesterParams h = reference_harvester();
  h.rho = 0.0;
  CHECK_THROWS_AS(source_impedance(h), ConfigError);
  h = reference_harvester();
  h.c_p_farad = -1e-9;
  CHECK_THROWS_AS(max_power(h, 1.0), ConfigError);
  h = reference_harvester();
  CHECK_THROWS_AS(open_circuit_voltage(h, -1.0), ConfigError);
}
