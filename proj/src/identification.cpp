#include "rpveh/identification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "rpveh/table.hpp"

namespace rpveh {

void PowerSurface::validate() const {
  if (v_axis.size() < 2 || phi_axis.size() < 2)
    throw ConfigError("power surface: need at least a 2x2 grid");
  if (p.size() != v_axis.size() * phi_axis.size())
    throw ConfigError("power surface: value count does not match the grid");
  bool any_positive = false;
  for (double v : p) {
    if (!std::isfinite(v))
      throw ConfigError("power surface: non-finite entry");
    any_positive = any_positive || v > 0;
  }
  if (!any_positive)
    throw ConfigError("power surface: no positive power anywhere");
}

namespace {

// Gaussian elimination for the small real systems used by the quadratic fit.
template <std::size_t N>
std::array<double, N> solve_real(std::array<std::array<double, N>, N> a,
                                 std::array<double, N> b) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300)
      throw SingularNetworkError("quadratic fit: singular normal equations");
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, N> x{};
  for (std::size_t ri = N; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t c = ri + 1; c < N; ++c) acc -= a[ri][c] * x[c];
    x[ri] = acc / a[ri][ri];
  }
  return x;
}

}  // namespace

SurfaceOptimum locate_optimum(const PowerSurface& s) {
  s.validate();
  std::size_t bi = 0, bj = 0;
  double best = s.at(0, 0);
  for (std::size_t i = 0; i < s.v_axis.size(); ++i)
    for (std::size_t j = 0; j < s.phi_axis.size(); ++j)
      if (s.at(i, j) > best) {
        best = s.at(i, j);
        bi = i;
        bj = j;
      }
  if (bi == 0 || bi + 1 == s.v_axis.size() || bj == 0 ||
      bj + 1 == s.phi_axis.size())
    throw UnbracketedOptimumError(
        "power surface peaks on the grid boundary; extend the sweep");

  // Least-squares biquadratic over the 3x3 neighborhood, in coordinates
  // centered on the peak cell.
  std::array<std::array<double, 6>, 6> ata{};
  std::array<double, 6> atb{};
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      const double u = s.v_axis[bi + di] - s.v_axis[bi];
      const double w = s.phi_axis[bj + dj] - s.phi_axis[bj];
      const double val = s.at(bi + di, bj + dj);
      const std::array<double, 6> row{1.0, u, w, u * u, u * w, w * w};
      for (std::size_t r = 0; r < 6; ++r) {
        atb[r] += row[r] * val;
        for (std::size_t c = 0; c < 6; ++c) ata[r][c] += row[r] * row[c];
      }
    }
  }
  const auto c = solve_real<6>(ata, atb);

  // Stationary point of c0 + c1 u + c2 w + c3 u^2 + c4 uw + c5 w^2.
  const double det = 4.0 * c[3] * c[5] - c[4] * c[4];
  double du = 0, dw = 0;
  const double cell_u =
      std::max(s.v_axis[bi + 1] - s.v_axis[bi], s.v_axis[bi] - s.v_axis[bi - 1]);
  const double cell_w = std::max(s.phi_axis[bj + 1] - s.phi_axis[bj],
                                 s.phi_axis[bj] - s.phi_axis[bj - 1]);
  if (c[3] < 0 && det > 0) {
    du = (-2.0 * c[5] * c[1] + c[4] * c[2]) / det;
    dw = (-2.0 * c[3] * c[2] + c[4] * c[1]) / det;
    if (std::abs(du) > cell_u || std::abs(dw) > cell_w) du = dw = 0;
  }
  SurfaceOptimum opt;
  opt.v_opt = s.v_axis[bi] + du;
  opt.phi_opt = s.phi_axis[bj] + dw;
  opt.p_max = c[0] + c[1] * du + c[2] * dw + c[3] * du * du +
              c[4] * du * dw + c[5] * dw * dw;
  return opt;
}

IdentifiedParams identify_parameters(double v_opt, double p_max,
                                     double a_max_g, double f_res_hz,
                                     double c_p_farad) {
  if (!(v_opt > 0) || !(p_max > 0) || !(a_max_g > 0) || !(f_res_hz > 0) ||
      !(c_p_farad > 0))
    throw ConfigError("identify_parameters: all inputs must be > 0");
  IdentifiedParams out;
  out.delta_v_per_g = 2.0 * v_opt / a_max_g;
  const double va = out.delta_v_per_g * a_max_g;
  out.rho = va * va / 8.0 * (2.0 * kPi * f_res_hz * c_p_farad) / p_max;
  return out;
}

Complex impedance_from_operating_point(double v_opt, double i_opt,
                                       double p_max) {
  if (!(v_opt > 0) || !(i_opt > 0))
    throw ConfigError("operating point: amplitudes must be > 0");
  if (!(p_max > 0))
    throw ConfigError("operating point: power must be > 0");
  const double cos_theta = 2.0 * p_max / (v_opt * i_opt);
  if (cos_theta > 1.0)
    throw ConfigError(
        "operating point: 2*P exceeds V*I; measurement is inconsistent "
        "(arccos domain)");
  const double theta = std::acos(cos_theta);
  return std::polar(v_opt / i_opt, theta);
}

ParallelEquivalents parallel_equivalents(const Complex& z) {
  const double mag2 = std::norm(z);
  if (!(mag2 > 0)) throw ConfigError("parallel_equivalents: zero impedance");
  ParallelEquivalents out;
  out.r_par = z.real() != 0 ? mag2 / z.real()
                            : std::numeric_limits<double>::infinity();
  out.x_par = z.imag() != 0 ? mag2 / z.imag()
                            : std::numeric_limits<double>::infinity();
  return out;
}

PowerSurface make_power_surface(const HarvesterParams& h, double a_max_g,
                                const AxisSpec& v_axis,
                                const AxisSpec& phi_axis, double noise_rel,
                                std::uint64_t seed) {
  PowerSurface s;
  s.v_axis = v_axis.values();
  s.phi_axis = phi_axis.values();
  s.a_max_g = a_max_g;
  s.drive_freq_hz = h.f_res_hz;
  s.p.reserve(s.v_axis.size() * s.phi_axis.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (double v : s.v_axis)
    for (double phi : s.phi_axis) {
      double p = power_generator_load(h, a_max_g, v, phi).p;
      if (noise_rel > 0) p *= 1.0 + noise_rel * uni(rng);
      s.p.push_back(p);
    }
  return s;
}

void write_power_surface_csv_file(const std::string& path,
                                  const PowerSurface& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << "# a_max=" << format_double(s.a_max_g)
     << " f=" << format_double(s.drive_freq_hz) << "\n";
  GridData g;
  g.axis1 = s.v_axis;
  g.axis2 = s.phi_axis;
  g.values = s.p;
  write_grid_csv(os, g);
}

PowerSurface read_power_surface_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open: " + path);
  PowerSurface s;
  bool meta_seen = false;
  std::stringstream grid_part;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        if (tok.rfind("a_max=", 0) == 0) {
          s.a_max_g = std::stod(tok.substr(6));
          meta_seen = true;
        } else if (tok.rfind("f=", 0) == 0) {
          s.drive_freq_hz = std::stod(tok.substr(2));
        }
      }
      continue;
    }
    grid_part << line << "\n";
  }
  if (!meta_seen)
    throw ConfigError(path + ": missing '# a_max=<g> f=<Hz>' metadata line");
  const GridData g = read_grid_csv(grid_part);
  s.v_axis = g.axis1;
  s.phi_axis = g.axis2;
  s.p = g.values;
  s.validate();
  return s;
}

}  // namespace rpveh
