#include "rpveh/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rpveh/table.hpp"

namespace rpveh {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + s + "'");
  }
}

}  // namespace

void KeyValues::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : items_)
    if (k == key) {
      v = value;
      return;
    }
  items_.emplace_back(key, value);
}

void KeyValues::set_double(const std::string& key, double value) {
  set(key, format_double(value));
}

bool KeyValues::has(const std::string& key) const { return find(key); }

const std::string* KeyValues::find(const std::string& key) const {
  for (const auto& [k, v] : items_)
    if (k == key) return &v;
  return nullptr;
}

std::string KeyValues::get(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ConfigError("missing config key '" + key + "'");
  return *v;
}

double KeyValues::get_double(const std::string& key) const {
  return to_double(key, get(key));
}

double KeyValues::get_double_or(const std::string& key,
                                double fallback) const {
  const std::string* v = find(key);
  return v ? to_double(key, *v) : fallback;
}

int KeyValues::get_int_or(const std::string& key, int fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  const double d = to_double(key, *v);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d)
    throw ConfigError("key '" + key + "': expected an integer");
  return i;
}

bool KeyValues::any_with_prefix(const std::string& prefix) const {
  return std::any_of(items_.begin(), items_.end(), [&](const auto& kv) {
    return kv.first.rfind(prefix, 0) == 0;
  });
}

void KeyValues::merge_from(const KeyValues& other) {
  for (const auto& [k, v] : other.items()) set(k, v);
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    kv.set(key, value);
  }
  return kv;
}

KeyValues load_key_values_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_key_values(buf.str());
}

std::string serialize_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv.items()) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

KeyValues preset_keyvalues(const std::string& name) {
  KeyValues kv;
  if (name == "ppa4011") {
    // Reference harvester. q_factor is the shipped default calibrated so the
    // matched-load 0 -> 1 g step settles in about 100 ms (see calibrate_q).
    kv.set("harvester.delta_v_per_g", "8.0");
    kv.set("harvester.rho", "0.9");
    kv.set("harvester.f_res_hz", "137.6");
    kv.set("harvester.c_p_farad", "405e-9");
    kv.set("harvester.q_factor", "23.5");
    return kv;
  }
  if (name == "table1") {
    kv.set("controller.r_m_ohm", "20");
    kv.set("controller.c_x_farad", "1e-9");
    kv.set("controller.r_x_ohm", "330e3");
    kv.set("controller.r_y_ohm", "8e3");
    kv.set("controller.r_f_ohm", "100e3");
    kv.set("controller.r_a_ohm", "275e3");
    kv.set("controller.r_b_ohm", "2e3");
    kv.set("controller.r_p_ohm", "150e3");
    kv.set("controller.r_q_ohm", "10e6");
    kv.set("controller.v_supply", "5");
    kv.set("controller.l_b_henry", "100e-3");
    kv.set("controller.v_dc", "5");
    kv.set("controller.v_n", "5");
    kv.set("controller.dead_time_s", "1e-6");
    return kv;
  }
  throw ConfigError("unknown preset '" + name +
                    "' (available: ppa4011, table1)");
}

// ---------------------------------------------------------------------------
// Scenario binding
// ---------------------------------------------------------------------------

namespace {

std::vector<AccelSegment> parse_segments(const std::string& text) {
  // "duration:amplitude,duration:amplitude,..."
  std::vector<AccelSegment> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("profile.segments: expected 'duration:amplitude', "
                        "got '" + item + "'");
    out.push_back({to_double("profile.segments", trim(item.substr(0, colon))),
                   to_double("profile.segments", trim(item.substr(colon + 1)))});
  }
  if (out.empty()) throw ConfigError("profile.segments: empty list");
  return out;
}

std::string segments_to_string(const std::vector<AccelSegment>& segs) {
  std::string out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i) out += ",";
    out += format_double(segs[i].duration_s);
    out += ":";
    out += format_double(segs[i].amplitude_g);
  }
  return out;
}

}  // namespace

Scenario scenario_from_keyvalues(const KeyValues& kv) {
  Scenario sc;
  sc.harvester.delta_v_per_g = kv.get_double("harvester.delta_v_per_g");
  sc.harvester.rho = kv.get_double("harvester.rho");
  sc.harvester.f_res_hz = kv.get_double("harvester.f_res_hz");
  sc.harvester.c_p_farad = kv.get_double("harvester.c_p_farad");
  sc.harvester.q_factor = kv.get_double_or("harvester.q_factor", 23.5);
  sc.harvester.validate();

  if (kv.any_with_prefix("controller.")) {
    ControllerParams cp = ControllerParams::table1_defaults();
    cp.r_m_ohm = kv.get_double_or("controller.r_m_ohm", cp.r_m_ohm);
    cp.c_x_farad = kv.get_double_or("controller.c_x_farad", cp.c_x_farad);
    cp.r_x_ohm = kv.get_double_or("controller.r_x_ohm", cp.r_x_ohm);
    cp.r_y_ohm = kv.get_double_or("controller.r_y_ohm", cp.r_y_ohm);
    cp.r_f_ohm = kv.get_double_or("controller.r_f_ohm", cp.r_f_ohm);
    cp.r_a_ohm = kv.get_double_or("controller.r_a_ohm", cp.r_a_ohm);
    cp.r_b_ohm = kv.get_double_or("controller.r_b_ohm", cp.r_b_ohm);
    cp.r_p_ohm = kv.get_double_or("controller.r_p_ohm", cp.r_p_ohm);
    cp.r_q_ohm = kv.get_double_or("controller.r_q_ohm", cp.r_q_ohm);
    cp.v_supply = kv.get_double_or("controller.v_supply", cp.v_supply);
    cp.l_b_henry = kv.get_double_or("controller.l_b_henry", cp.l_b_henry);
    cp.v_dc = kv.get_double_or("controller.v_dc", cp.v_dc);
    cp.v_n = kv.get_double_or("controller.v_n", cp.v_n);
    cp.dead_time_s = kv.get_double_or("controller.dead_time_s", cp.dead_time_s);
    cp.aux.c_b_farad =
        kv.get_double_or("controller.aux_c_b_farad", cp.aux.c_b_farad);
    cp.aux.r_tp_ohm =
        kv.get_double_or("controller.aux_r_tp_ohm", cp.aux.r_tp_ohm);
    cp.aux.r_tn_ohm =
        kv.get_double_or("controller.aux_r_tn_ohm", cp.aux.r_tn_ohm);
    cp.aux.c_dt_farad =
        kv.get_double_or("controller.aux_c_dt_farad", cp.aux.c_dt_farad);
    cp.validate();
    sc.controller = cp;
  }

  if (kv.has("load.kind")) {
    const std::string kind = kv.get("load.kind");
    if (kind == "parallel_impedance") {
      sc.load = ParallelImpedance{kv.get_double("load.r_ohm"),
                                  kv.get_double("load.x_ohm")};
    } else if (kind == "voltage_generator") {
      sc.load = VoltageGenerator{kv.get_double("load.v_volt"),
                                 kv.get_double_or("load.phi_rad", 0.0)};
    } else if (kind == "emulated") {
      EmulatedLoad em{};
      em.r_e_ohm = kv.get_double("load.r_e_ohm");
      em.c_n_farad = kv.get_double("load.c_n_farad");
      em.x_e_ohm = 0;  // recomputed at the drive frequency below
      sc.load = em;
    } else {
      throw ConfigError("load.kind: unknown kind '" + kind + "'");
    }
  }

  sc.profile.drive_freq_hz =
      kv.get_double_or("profile.drive_freq_hz", sc.harvester.f_res_hz);
  sc.profile.segments = kv.has("profile.segments")
                            ? parse_segments(kv.get("profile.segments"))
                            : std::vector<AccelSegment>{{1.0, 1.0}};
  sc.profile.validate();
  if (sc.load)
    if (auto* em = std::get_if<EmulatedLoad>(&*sc.load))
      em->x_e_ohm = -1.0 / (2.0 * kPi * sc.profile.drive_freq_hz *
                            em->c_n_farad);

  sc.sim.dt = kv.get_double_or("sim.dt_s", sc.sim.dt);
  sc.sim.t_end = kv.get_double_or("sim.t_end_s", 0.0);
  const std::string fidelity =
      kv.find("sim.fidelity") ? kv.get("sim.fidelity") : "behavioral";
  if (fidelity == "behavioral")
    sc.sim.fidelity = Fidelity::behavioral;
  else if (fidelity == "switched")
    sc.sim.fidelity = Fidelity::switched;
  else
    throw ConfigError("sim.fidelity: expected behavioral|switched");
  sc.sim.record_decimation =
      kv.get_int_or("sim.record_decimation", sc.sim.record_decimation);
  if (kv.has("sim.q_override"))
    sc.sim.q_override = kv.get_double("sim.q_override");
  const std::string cond =
      kv.find("sim.conditioning") ? kv.get("sim.conditioning") : "approximate";
  if (cond == "approximate")
    sc.sim.conditioning = ConditioningMode::approximate;
  else if (cond == "exact")
    sc.sim.conditioning = ConditioningMode::exact;
  else
    throw ConfigError("sim.conditioning: expected approximate|exact");
  sc.sim.deriv_corner_hz = kv.get_double_or("sim.deriv_corner_hz", 0.0);
  sc.sim.diode_drop_v = kv.get_double_or("sim.diode_drop_v", 0.0);
  sc.sim.avg_window_periods =
      kv.get_int_or("sim.avg_window_periods", sc.sim.avg_window_periods);

  const std::string tracker =
      kv.find("tracker.mode") ? kv.get("tracker.mode") : "none";
  if (tracker == "none")
    sc.tracker = TrackerMode::none;
  else if (tracker == "pno")
    sc.tracker = TrackerMode::pno;
  else
    throw ConfigError("tracker.mode: expected none|pno");
  sc.mppt.v_start = kv.get_double_or("tracker.v_start_volt", sc.mppt.v_start);
  sc.mppt.phi_start =
      kv.get_double_or("tracker.phi_start_rad", sc.mppt.phi_start);
  sc.mppt.dv = kv.get_double_or("tracker.dv_volt", sc.mppt.dv);
  sc.mppt.dphi = kv.get_double_or("tracker.dphi_rad", sc.mppt.dphi);
  sc.mppt.dwell_periods =
      kv.get_int_or("tracker.dwell_periods", sc.mppt.dwell_periods);
  sc.mppt.measure_periods =
      kv.get_int_or("tracker.measure_periods", sc.mppt.measure_periods);

  if (kv.has("outputs")) {
    sc.outputs.traces = false;
    sc.outputs.summary = false;
    std::stringstream ss(kv.get("outputs"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item == "traces")
        sc.outputs.traces = true;
      else if (item == "summary")
        sc.outputs.summary = true;
      else if (!item.empty())
        throw ConfigError("outputs: unknown artifact '" + item + "'");
    }
  }
  return sc;
}

KeyValues scenario_to_keyvalues(const Scenario& sc) {
  KeyValues kv;
  kv.set_double("harvester.delta_v_per_g", sc.harvester.delta_v_per_g);
  kv.set_double("harvester.rho", sc.harvester.rho);
  kv.set_double("harvester.f_res_hz", sc.harvester.f_res_hz);
  kv.set_double("harvester.c_p_farad", sc.harvester.c_p_farad);
  kv.set_double("harvester.q_factor", sc.harvester.q_factor);
  if (sc.controller) {
    const ControllerParams& cp = *sc.controller;
    kv.set_double("controller.r_m_ohm", cp.r_m_ohm);
    kv.set_double("controller.c_x_farad", cp.c_x_farad);
    kv.set_double("controller.r_x_ohm", cp.r_x_ohm);
    kv.set_double("controller.r_y_ohm", cp.r_y_ohm);
    kv.set_double("controller.r_f_ohm", cp.r_f_ohm);
    kv.set_double("controller.r_a_ohm", cp.r_a_ohm);
    kv.set_double("controller.r_b_ohm", cp.r_b_ohm);
    kv.set_double("controller.r_p_ohm", cp.r_p_ohm);
    kv.set_double("controller.r_q_ohm", cp.r_q_ohm);
    kv.set_double("controller.v_supply", cp.v_supply);
    kv.set_double("controller.l_b_henry", cp.l_b_henry);
    kv.set_double("controller.v_dc", cp.v_dc);
    kv.set_double("controller.v_n", cp.v_n);
    kv.set_double("controller.dead_time_s", cp.dead_time_s);
    kv.set_double("controller.aux_c_b_farad", cp.aux.c_b_farad);
    kv.set_double("controller.aux_r_tp_ohm", cp.aux.r_tp_ohm);
    kv.set_double("controller.aux_r_tn_ohm", cp.aux.r_tn_ohm);
    kv.set_double("controller.aux_c_dt_farad", cp.aux.c_dt_farad);
  }
  if (sc.load) {
    if (const auto* z = std::get_if<ParallelImpedance>(&*sc.load)) {
      kv.set("load.kind", "parallel_impedance");
      kv.set_double("load.r_ohm", z->r_load);
      kv.set_double("load.x_ohm", z->x_load);
    } else if (const auto* g = std::get_if<VoltageGenerator>(&*sc.load)) {
      kv.set("load.kind", "voltage_generator");
      kv.set_double("load.v_volt", g->v_load);
      kv.set_double("load.phi_rad", g->phi_load);
    } else if (const auto* e = std::get_if<EmulatedLoad>(&*sc.load)) {
      kv.set("load.kind", "emulated");
      kv.set_double("load.r_e_ohm", e->r_e_ohm);
      kv.set_double("load.c_n_farad", e->c_n_farad);
    }
  }
  kv.set_double("profile.drive_freq_hz", sc.profile.drive_freq_hz);
  kv.set("profile.segments", segments_to_string(sc.profile.segments));
  kv.set_double("sim.dt_s", sc.sim.dt);
  kv.set_double("sim.t_end_s", sc.sim.t_end);
  kv.set("sim.fidelity",
         sc.sim.fidelity == Fidelity::switched ? "switched" : "behavioral");
  kv.set("sim.record_decimation", std::to_string(sc.sim.record_decimation));
  if (sc.sim.q_override) kv.set_double("sim.q_override", *sc.sim.q_override);
  kv.set("sim.conditioning",
         sc.sim.conditioning == ConditioningMode::exact ? "exact"
                                                        : "approximate");
  kv.set_double("sim.deriv_corner_hz", sc.sim.deriv_corner_hz);
  kv.set_double("sim.diode_drop_v", sc.sim.diode_drop_v);
  kv.set("sim.avg_window_periods", std::to_string(sc.sim.avg_window_periods));
  if (sc.tracker == TrackerMode::pno) {
    kv.set("tracker.mode", "pno");
    kv.set_double("tracker.v_start_volt", sc.mppt.v_start);
    kv.set_double("tracker.phi_start_rad", sc.mppt.phi_start);
    kv.set_double("tracker.dv_volt", sc.mppt.dv);
    kv.set_double("tracker.dphi_rad", sc.mppt.dphi);
    kv.set("tracker.dwell_periods", std::to_string(sc.mppt.dwell_periods));
    kv.set("tracker.measure_periods",
           std::to_string(sc.mppt.measure_periods));
  }
  std::string outs;
  if (sc.outputs.traces) outs += "traces";
  if (sc.outputs.summary) outs += outs.empty() ? "summary" : ",summary";
  if (!outs.empty()) kv.set("outputs", outs);
  return kv;
}

void validate_for_simulation(const Scenario& sc) {
  const bool has_load = sc.load.has_value();
  const bool has_controller = sc.controller.has_value();
  if (has_load == has_controller)
    throw ConfigError(
        "simulate: exactly one of a load section or a controller section "
        "must be present");
  if (sc.sim.fidelity == Fidelity::switched && !has_controller)
    throw ConfigError("simulate: switched fidelity requires a controller");
  if (sc.tracker == TrackerMode::pno) {
    if (!has_load || !std::holds_alternative<VoltageGenerator>(*sc.load))
      throw ConfigError(
          "simulate: the pno tracker requires a voltage_generator load");
  }
}

}  // namespace rpveh
