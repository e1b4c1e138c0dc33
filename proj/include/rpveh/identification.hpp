#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpveh/harvester.hpp"
#include "rpveh/load_analysis.hpp"
#include "rpveh/types.hpp"

namespace rpveh {

// Measured (or synthetic) average extracted power over a grid of
// voltage-generator operating points at one drive amplitude.
struct PowerSurface {
  std::vector<double> v_axis;    // volts
  std::vector<double> phi_axis;  // radians
  std::vector<double> p;         // watts, row-major in v_axis
  double a_max_g = 0;
  double drive_freq_hz = 0;

  double at(std::size_t i, std::size_t j) const {
    return p[i * phi_axis.size() + j];
  }
  void validate() const;  // rectangular, finite, at least one positive entry
};

struct SurfaceOptimum {
  double v_opt;
  double phi_opt;
  double p_max;
};

// Grid argmax refined by a biquadratic fit over the 3x3 neighborhood.
// Throws UnbracketedOptimumError when the argmax sits on the grid boundary.
SurfaceOptimum locate_optimum(const PowerSurface& s);

struct IdentifiedParams {
  double delta_v_per_g;
  double rho;
};

// Inverts the optimal-generator and maximum-power relations.
IdentifiedParams identify_parameters(double v_opt, double p_max,
                                     double a_max_g, double f_res_hz,
                                     double c_p_farad);

// Reconstructs the emulated series impedance from the optimal operating
// point (amplitudes and average power). Requires 0 < 2*p_max <= v_opt*i_opt.
Complex impedance_from_operating_point(double v_opt, double i_opt,
                                       double p_max);

struct ParallelEquivalents {
  double r_par;  // infinite when Re{z} == 0
  double x_par;  // infinite when Im{z} == 0
};

// Series -> parallel conversion; exact complex identity.
ParallelEquivalents parallel_equivalents(const Complex& z);

// Synthetic surface generated from the closed-form generator power, with an
// optional uniform relative noise knob.
PowerSurface make_power_surface(const HarvesterParams& h, double a_max_g,
                                const AxisSpec& v_axis,
                                const AxisSpec& phi_axis,
                                double noise_rel = 0.0, std::uint64_t seed = 0);

// Same CSV grid format as the sweep exports plus a leading metadata line
// "# a_max=<g> f=<Hz>".
void write_power_surface_csv_file(const std::string& path,
                                  const PowerSurface& s);
PowerSurface read_power_surface_csv_file(const std::string& path);

}  // namespace rpveh
