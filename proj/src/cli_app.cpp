#include "rpveh/cli_app.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "rpveh/config.hpp"
#include "rpveh/identification.hpp"
#include "rpveh/table.hpp"

namespace rpveh {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> presets;
  std::uint64_t seed = 0;
};

KeyValues merged_keyvalues(const GlobalOptions& g) {
  KeyValues kv;
  for (const auto& p : g.presets) kv.merge_from(preset_keyvalues(p));
  if (!g.config_path.empty()) kv.merge_from(load_key_values_file(g.config_path));
  return kv;
}

std::string out_path(const GlobalOptions& g, const std::string& name) {
  if (g.out_dir.empty()) return name;
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(what + ": not a number: '" + item + "'");
    }
  }
  return out;
}

double deg(double rad) { return rad * 180.0 / kPi; }

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

int cmd_analyze(const GlobalOptions& g, double a_max, const std::string& ratios) {
  const KeyValues kv = merged_keyvalues(g);
  Scenario sc = scenario_from_keyvalues(kv);
  const HarvesterParams& h = sc.harvester;

  const Complex z_p = source_impedance(h);
  const OptimalImpedance opt = optimal_impedance(h);
  const double p_max = max_power(h, a_max);
  const OptimalGenerator gen = optimal_generator(h, a_max);
  const Complex v_oc = open_circuit_voltage(h, a_max);

  std::cout << "harvester analysis @ " << format_double(a_max) << " g\n"
            << "  source impedance     : " << format_double(z_p.real())
            << " + j" << format_double(z_p.imag()) << " ohm\n"
            << "  open-circuit voltage : " << format_double(std::abs(v_oc))
            << " V at " << format_double(deg(std::arg(v_oc))) << " deg\n"
            << "  optimal series load  : " << format_double(opt.series.real())
            << " + j" << format_double(opt.series.imag()) << " ohm\n"
            << "  optimal parallel load: R_opt = " << format_double(opt.r_par)
            << " ohm, X_opt = " << format_double(opt.x_par) << " ohm\n"
            << "  optimal generator    : " << format_double(gen.v_opt)
            << " V at " << format_double(gen.phi_opt) << " rad\n"
            << "  maximum power        : " << format_double(p_max) << " W\n";

  const std::vector<double> ratio_list = parse_double_list(ratios, "--ratios");
  if (!ratio_list.empty()) {
    std::cout << "  fixed-generator waste vs amplitude ratio:\n";
    for (double r : ratio_list)
      std::cout << "    A/A0 = " << format_double(r) << ": lambda_waste = "
                << format_double(lambda_waste(1.0, r)) << " %\n";
  }

  if (!g.out_dir.empty()) {
    ColumnTable summary;
    summary.header = {"a_max_g",   "r_p_ohm",  "x_p_ohm", "r_opt_ohm",
                      "x_opt_ohm", "v_opt_v",  "p_max_w"};
    summary.columns = {{a_max},          {z_p.real()}, {z_p.imag()},
                       {opt.r_par},      {opt.x_par},  {gen.v_opt},
                       {p_max}};
    write_columns_csv_file(out_path(g, "analyze_summary.csv"), summary);
    if (!ratio_list.empty()) {
      ColumnTable lt;
      lt.header = {"ratio", "lambda_waste_pct"};
      lt.columns = {{}, {}};
      for (double r : ratio_list) {
        lt.columns[0].push_back(r);
        lt.columns[1].push_back(lambda_waste(1.0, r));
      }
      write_columns_csv_file(out_path(g, "lambda_waste.csv"), lt);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int cmd_sweep_impedance(const GlobalOptions& g, double rho, double lo,
                        double hi, int points) {
  const GridData grid = sweep_impedance_grid(
      rho, AxisSpec{lo, hi, points, true}, AxisSpec{lo, hi, points, true});
  const std::string path = out_path(g, "sweep_impedance.csv");
  write_grid_csv_file(path, grid);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_sweep_generator(const GlobalOptions& g, double v_max, int points) {
  const GridData grid =
      sweep_generator_grid(AxisSpec{0.0, v_max, points, false},
                           AxisSpec{-kPi / 2.0, kPi / 2.0, points, false});
  const std::string path = out_path(g, "sweep_generator.csv");
  write_grid_csv_file(path, grid);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_sweep_ratio(const GlobalOptions& g, double from, double to,
                    int points) {
  const RatioCurve c = sweep_amplitude_ratio(AxisSpec{from, to, points, false});
  ColumnTable t;
  t.header = {"ratio", "p_max_norm", "p_load_z0_norm", "p_load_v0_norm",
              "lambda_waste_pct"};
  t.columns = {c.ratio, c.p_max_norm, c.p_load_z0_norm, c.p_load_v0_norm,
               c.lambda_waste_pct};
  const std::string path = out_path(g, "sweep_ratio.csv");
  write_columns_csv_file(path, t);
  std::cout << "wrote " << path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

void write_traces(const GlobalOptions& g, const SimResult& r) {
  ColumnTable t;
  t.header = {"t", "accel", "v_load", "i_load", "p_dc", "x", "x_dot"};
  t.columns = {r.traces.t,      r.traces.accel_g, r.traces.v_load,
               r.traces.i_load, r.traces.p_dc,    r.traces.x,
               r.traces.x_dot};
  write_columns_csv_file(out_path(g, "traces.csv"), t);
}

void write_summary(const GlobalOptions& g, const SimResult& r, int window) {
  const Complex v = r.v_phasor(window);
  const Complex i = r.i_phasor(window);
  const auto settle = settle_time(r);
  ColumnTable t;
  t.header = {"avg_power_w",   "v_amp_v",        "v_phase_deg",
              "i_amp_a",       "phase_lag_deg",  "settle_time_s",
              "switch_count",  "min_switch_interval_s"};
  t.columns = {{r.avg_power(window)},
               {std::abs(v)},
               {deg(std::arg(v))},
               {std::abs(i)},
               {deg(r.phase_lag(window))},
               {settle ? *settle : std::numeric_limits<double>::quiet_NaN()},
               {static_cast<double>(r.switch_count)},
               {r.min_conduction_interval}};
  write_columns_csv_file(out_path(g, "summary.csv"), t);
}

int cmd_simulate(const GlobalOptions& g) {
  const KeyValues kv = merged_keyvalues(g);
  Scenario sc = scenario_from_keyvalues(kv);
  validate_for_simulation(sc);

  SimResult result;
  if (sc.tracker == TrackerMode::pno) {
    PnoResult pno = run_pno_2d(sc.harvester, sc.profile, sc.mppt, sc.sim);
    result = std::move(pno.sim);
    ColumnTable t;
    t.header = {"t", "v_volt", "phi_rad", "p_w"};
    t.columns = {{}, {}, {}, {}};
    for (const auto& d : pno.trajectory) {
      t.columns[0].push_back(d.t);
      t.columns[1].push_back(d.v_amp);
      t.columns[2].push_back(d.phi);
      t.columns[3].push_back(d.p_measured);
    }
    write_columns_csv_file(out_path(g, "pno_trajectory.csv"), t);
  } else if (sc.sim.fidelity == Fidelity::switched) {
    result = simulate_switched(sc.harvester, *sc.controller, sc.profile,
                               sc.sim);
  } else if (sc.controller) {
    const double omega = 2.0 * kPi * sc.profile.drive_freq_hz;
    result = simulate_behavioral(sc.harvester,
                                 emulated_admittance(*sc.controller, omega),
                                 sc.profile, sc.sim);
  } else {
    result = simulate_behavioral(sc.harvester, *sc.load, sc.profile, sc.sim);
  }

  const int window = sc.sim.avg_window_periods;
  std::cout << "avg power (last " << window
            << " periods): " << format_double(result.avg_power(window))
            << " W\n";
  const Complex v = result.v_phasor(window);
  std::cout << "v_load fundamental: " << format_double(std::abs(v)) << " V at "
            << format_double(deg(std::arg(v))) << " deg\n"
            << "phase lag (I behind V): "
            << format_double(deg(result.phase_lag(window))) << " deg\n";
  if (const auto settle = settle_time(result))
    std::cout << "settle time after last amplitude change: "
              << format_double(*settle) << " s\n";
  for (const auto& w : result.warnings) std::cout << "warning: " << w << "\n";

  if (sc.outputs.traces) write_traces(g, result);
  if (sc.outputs.summary) write_summary(g, result, window);
  return 0;
}

// ---------------------------------------------------------------------------
// identify
// ---------------------------------------------------------------------------

struct IdentifyRow {
  double a_max, v_opt, phi_opt, p_max, delta, rho;
  double r_par = std::numeric_limits<double>::quiet_NaN();
  double x_par = std::numeric_limits<double>::quiet_NaN();
};

IdentifyRow identify_surface(const PowerSurface& s,
                             const HarvesterParams* truth, double c_p) {
  const SurfaceOptimum opt = locate_optimum(s);
  const IdentifiedParams ident = identify_parameters(
      opt.v_opt, opt.p_max, s.a_max_g, s.drive_freq_hz, c_p);
  IdentifyRow row{s.a_max_g, opt.v_opt, opt.phi_opt,
                  opt.p_max, ident.delta_v_per_g, ident.rho};
  if (truth) {
    // Synthetic data: the load current at the optimum is available, so the
    // full operating-point impedance reconstruction can run.
    const Complex i_load =
        power_generator_load(*truth, s.a_max_g, opt.v_opt, opt.phi_opt).i_load;
    const Complex z =
        impedance_from_operating_point(opt.v_opt, std::abs(i_load), opt.p_max);
    const ParallelEquivalents pe = parallel_equivalents(z);
    row.r_par = pe.r_par;
    row.x_par = pe.x_par;
  }
  return row;
}

int cmd_identify(const GlobalOptions& g, bool synthetic,
                 const std::string& amplitudes, double noise,
                 const std::vector<std::string>& surface_files) {
  std::vector<IdentifyRow> rows;
  if (synthetic || surface_files.empty()) {
    const KeyValues kv = merged_keyvalues(g);
    const Scenario sc = scenario_from_keyvalues(kv);
    const HarvesterParams& h = sc.harvester;
    for (double a : parse_double_list(amplitudes, "--amplitudes")) {
      const double v_opt = optimal_generator(h, a).v_opt;
      const PowerSurface s = make_power_surface(
          h, a, AxisSpec{0.3 * v_opt, 1.7 * v_opt, 41, false},
          AxisSpec{-1.0, 1.0, 41, false}, noise, g.seed);
      if (!g.out_dir.empty())
        write_power_surface_csv_file(
            out_path(g, "surface_" + format_double(a) + "g.csv"), s);
      rows.push_back(identify_surface(s, &h, h.c_p_farad));
    }
  } else {
    // Measured surfaces carry no capacitance; the identification needs it
    // from the harvester config.
    const KeyValues kv = merged_keyvalues(g);
    const double c_p = kv.get_double("harvester.c_p_farad");
    for (const auto& f : surface_files)
      rows.push_back(
          identify_surface(read_power_surface_csv_file(f), nullptr, c_p));
  }

  std::cout << "a_max_g  v_opt_v  phi_opt_rad  p_max_w  delta_v_per_g  rho"
               "  r_opt_ohm  x_opt_ohm\n";
  for (const auto& r : rows)
    std::cout << format_double(r.a_max) << "  " << format_double(r.v_opt)
              << "  " << format_double(r.phi_opt) << "  "
              << format_double(r.p_max) << "  " << format_double(r.delta)
              << "  " << format_double(r.rho) << "  "
              << format_double(r.r_par) << "  " << format_double(r.x_par)
              << "\n";

  if (!g.out_dir.empty()) {
    ColumnTable t;
    t.header = {"a_max_g", "v_opt_v",       "phi_opt_rad", "p_max_w",
                "delta_v_per_g", "rho",     "r_opt_ohm",   "x_opt_ohm"};
    t.columns.assign(8, {});
    for (const auto& r : rows) {
      t.columns[0].push_back(r.a_max);
      t.columns[1].push_back(r.v_opt);
      t.columns[2].push_back(r.phi_opt);
      t.columns[3].push_back(r.p_max);
      t.columns[4].push_back(r.delta);
      t.columns[5].push_back(r.rho);
      t.columns[6].push_back(r.r_par);
      t.columns[7].push_back(r.x_par);
    }
    write_columns_csv_file(out_path(g, "identify_report.csv"), t);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// size-controller
// ---------------------------------------------------------------------------

int cmd_size_controller(const GlobalOptions& g, double tolerance) {
  const KeyValues kv = merged_keyvalues(g);
  const Scenario sc = scenario_from_keyvalues(kv);
  PartialController fixed;
  auto pin = [&](const char* key, std::optional<double>& slot) {
    if (kv.has(key)) slot = kv.get_double(key);
  };
  pin("controller.r_m_ohm", fixed.r_m_ohm);
  pin("controller.c_x_farad", fixed.c_x_farad);
  pin("controller.r_x_ohm", fixed.r_x_ohm);
  pin("controller.r_y_ohm", fixed.r_y_ohm);
  pin("controller.r_f_ohm", fixed.r_f_ohm);
  pin("controller.r_a_ohm", fixed.r_a_ohm);
  pin("controller.r_b_ohm", fixed.r_b_ohm);
  pin("controller.r_p_ohm", fixed.r_p_ohm);
  pin("controller.r_q_ohm", fixed.r_q_ohm);
  pin("controller.v_supply", fixed.v_supply);
  pin("controller.l_b_henry", fixed.l_b_henry);
  pin("controller.v_dc", fixed.v_dc);
  pin("controller.v_n", fixed.v_n);
  pin("controller.dead_time_s", fixed.dead_time_s);

  const SizingReport rep = size_controller(sc.harvester, fixed, tolerance);
  const ControllerParams& cp = rep.params;
  const EmulatedLoad em =
      emulated_admittance(cp, sc.harvester.omega_res());
  const HysteresisThresholds th = hysteresis_thresholds(cp);
  const CornerFrequencies fc = corner_frequencies(cp);

  auto line = [](const char* name, double value, const char* unit) {
    std::cout << "  " << name << " = " << format_double(value) << " " << unit
              << "\n";
  };
  std::cout << "sized controller components:\n";
  line("R_m", cp.r_m_ohm, "ohm");
  line("C_x", cp.c_x_farad, "F");
  line("R_x", cp.r_x_ohm, "ohm");
  line("R_y", cp.r_y_ohm, "ohm");
  line("R_f", cp.r_f_ohm, "ohm");
  line("R_a", cp.r_a_ohm, "ohm");
  line("R_b", cp.r_b_ohm, "ohm");
  line("R_p", cp.r_p_ohm, "ohm");
  line("R_q", cp.r_q_ohm, "ohm");
  line("L_B", cp.l_b_henry, "H");
  line("V+", cp.v_supply, "V");
  std::cout << "derived behavior:\n";
  line("R_e", em.r_e_ohm, "ohm");
  line("C_n", em.c_n_farad, "F");
  line("X_e @ f_res", em.x_e_ohm, "ohm");
  line("dV_T", th.delta_v_t, "V");
  line("f_x", fc.f_x_hz, "Hz");
  line("f_y", fc.f_y_hz, "Hz");
  std::cout << "targets: R_e = " << format_double(rep.r_e_target)
            << " ohm (achieved " << format_double(rep.r_e_achieved)
            << ", error " << format_double(rep.r_e_rel_error * 100.0)
            << " %), C_n = " << format_double(rep.c_n_target)
            << " F (achieved " << format_double(rep.c_n_achieved)
            << ", error " << format_double(rep.c_n_rel_error * 100.0)
            << " %)\n";

  if (!g.out_dir.empty()) {
    Scenario out_sc = sc;
    out_sc.controller = cp;
    const KeyValues out_kv = scenario_to_keyvalues(out_sc);
    KeyValues controller_only;
    for (const auto& [k, v] : out_kv.items())
      if (k.rfind("controller.", 0) == 0) controller_only.set(k, v);
    std::ofstream os(out_path(g, "sized_controller.conf"), std::ios::binary);
    os << serialize_key_values(controller_only);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate-q
// ---------------------------------------------------------------------------

int cmd_calibrate_q(const GlobalOptions& g, double target_s) {
  const KeyValues kv = merged_keyvalues(g);
  const Scenario sc = scenario_from_keyvalues(kv);
  const double q = calibrate_q(sc.harvester, target_s);
  std::cout << "q_factor = " << format_double(q) << " for a "
            << format_double(target_s)
            << " s matched-load step settle (5% band)\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  GlobalOptions g;
  CLI::App app{"resonant piezoelectric vibration energy harvester toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", g.config_path, "scenario config file");
  app.add_option("--out", g.out_dir, "output directory for CSV artifacts");
  app.add_option("--preset", g.presets,
                 "named preset (ppa4011, table1); may repeat")
      ->allow_extra_args(false);
  app.add_option("--seed", g.seed, "seed for the synthetic-noise knobs");

  double a_max = 1.0;
  std::string ratios = "0.5,1,2";
  auto* analyze = app.add_subcommand("analyze", "closed-form report");
  analyze->add_option("--a-max", a_max, "drive amplitude in g");
  analyze->add_option("--ratios", ratios,
                      "comma list of A/A0 ratios for the waste table");

  auto* sweep = app.add_subcommand("sweep", "grid and curve datasets");
  sweep->require_subcommand(1);
  double rho = 0.9, grid_lo = 0.1, grid_hi = 10.0, v_max = 2.0;
  int grid_points = 41;
  auto* sweep_z = sweep->add_subcommand("impedance",
                                        "normalized (R_N, X_N) power grid");
  sweep_z->add_option("--rho", rho, "coupling coefficient");
  sweep_z->add_option("--min", grid_lo, "lower normalized bound");
  sweep_z->add_option("--max", grid_hi, "upper normalized bound");
  sweep_z->add_option("--points", grid_points, "points per axis");
  auto* sweep_g = sweep->add_subcommand("generator",
                                        "normalized (V_N, Phi_N) power grid");
  sweep_g->add_option("--v-max", v_max, "upper V_N bound");
  sweep_g->add_option("--points", grid_points, "points per axis");
  double ratio_from = 0.5, ratio_to = 3.0;
  int ratio_points = 101;
  auto* sweep_r = sweep->add_subcommand("ratio", "fixed-load power curves");
  sweep_r->add_option("--from", ratio_from, "lower A/A0");
  sweep_r->add_option("--to", ratio_to, "upper A/A0");
  sweep_r->add_option("--points", ratio_points, "points");

  auto* simulate = app.add_subcommand("simulate", "time-domain run");
  (void)simulate;

  bool synthetic = false;
  std::string amplitudes = "0.75,1,1.25";
  double noise = 0.0;
  std::vector<std::string> surface_files;
  auto* identify = app.add_subcommand("identify", "parameter identification");
  identify->add_flag("--synthetic", synthetic,
                     "generate surfaces from the configured harvester");
  identify->add_option("--amplitudes", amplitudes,
                       "synthetic amplitudes (g), comma list");
  identify->add_option("--noise", noise, "relative noise on synthetic data");
  identify->add_option("surfaces", surface_files, "measured surface CSVs");

  double tolerance = 0.02;
  auto* size = app.add_subcommand("size-controller",
                                  "component sizing for a harvester");
  size->add_option("--tolerance", tolerance, "relative sizing tolerance");

  double target_settle = 0.1;
  auto* calq = app.add_subcommand(
      "calibrate-q", "bisect q_factor against a step-settle target");
  calq->add_option("--target", target_settle, "settle-time target in seconds");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(g, a_max, ratios);
    if (sweep->parsed()) {
      if (sweep_z->parsed())
        return cmd_sweep_impedance(g, rho, grid_lo, grid_hi, grid_points);
      if (sweep_g->parsed()) return cmd_sweep_generator(g, v_max, grid_points);
      if (sweep_r->parsed())
        return cmd_sweep_ratio(g, ratio_from, ratio_to, ratio_points);
    }
    if (simulate->parsed()) return cmd_simulate(g);
    if (identify->parsed())
      return cmd_identify(g, synthetic, amplitudes, noise, surface_files);
    if (size->parsed()) return cmd_size_controller(g, tolerance);
    if (calq->parsed()) return cmd_calibrate_q(g, target_settle);
    return 2;
  } catch (const SizingError& e) {
    std::cerr << "sizing failure [" << e.relation() << "]: " << e.what()
              << "\n";
    return 4;
  } catch (const UnbracketedOptimumError& e) {
    std::cerr << "identification warning: " << e.what() << "\n";
    return 3;
  } catch (const SimError& e) {
    std::cerr << "integration failure: " << e.what() << "\n";
    return 5;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rpveh
