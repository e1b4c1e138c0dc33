#pragma once

#include <vector>

#include "rpveh/transient.hpp"

namespace rpveh {

// Two-variable perturb-and-observe baseline operating a voltage-generator
// load: alternates single-axis perturbations of (V_load, Phi_load), keeps a
// perturbation direction per axis, and decides on window-averaged power
// measured after the mechanical transient has decayed.
struct PnoConfig {
  double v_start = 2.0;       // volts
  double phi_start = 0.0;     // radians
  double dv = 0.4;            // volts per perturbation
  double dphi = 0.1;          // radians per perturbation
  int dwell_periods = 45;     // drive periods between decisions
  int measure_periods = 5;    // trailing periods averaged per measurement
};

struct PnoDecision {
  double t;           // decision time
  double v_amp;       // generator amplitude applied after the decision
  double phi;         // generator phase applied after the decision
  double p_measured;  // window-averaged power that drove the decision
};

struct PnoResult {
  SimResult sim;
  std::vector<PnoDecision> trajectory;
  bool degenerate = false;  // both perturbation sizes were zero
};

PnoResult run_pno_2d(const HarvesterParams& h, const AccelProfile& profile,
                     const PnoConfig& mppt, const SimConfig& cfg);

}  // namespace rpveh
