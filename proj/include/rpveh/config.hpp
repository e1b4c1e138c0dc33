#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rpveh/interface_circuit.hpp"
#include "rpveh/mppt.hpp"
#include "rpveh/transient.hpp"

namespace rpveh {

// ---------------------------------------------------------------------------
// Flat commented key-value configuration text
// ---------------------------------------------------------------------------

// Ordered key/value store; keys use dotted section prefixes
// ("harvester.rho = 0.9"). '#' starts a comment line.
class KeyValues {
 public:
  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  bool has(const std::string& key) const;
  const std::string* find(const std::string& key) const;
  std::string get(const std::string& key) const;          // throws if absent
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int_or(const std::string& key, int fallback) const;
  bool any_with_prefix(const std::string& prefix) const;

  // Entries from `other` override entries here.
  void merge_from(const KeyValues& other);

  const std::vector<std::pair<std::string, std::string>>& items() const {
    return items_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values_file(const std::string& path);
std::string serialize_key_values(const KeyValues& kv);

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

enum class TrackerMode { none, pno };

struct OutputRequests {
  bool traces = true;
  bool summary = true;
};

// Everything a simulation/analysis command needs, bound to config keys.
struct Scenario {
  HarvesterParams harvester{};
  std::optional<ControllerParams> controller;
  std::optional<BehavioralLoad> load;
  AccelProfile profile{};
  SimConfig sim{};
  TrackerMode tracker = TrackerMode::none;
  PnoConfig mppt{};
  OutputRequests outputs{};
};

// Named presets: "ppa4011" (reference harvester, calibrated Q) and
// "table1" (prototype controller parts).
KeyValues preset_keyvalues(const std::string& name);

Scenario scenario_from_keyvalues(const KeyValues& kv);
KeyValues scenario_to_keyvalues(const Scenario& sc);

// Checks the load/controller exclusivity rule for simulate commands.
void validate_for_simulation(const Scenario& sc);

}  // namespace rpveh
