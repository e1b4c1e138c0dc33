#include "rpveh/transient.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace rpveh {

// ---------------------------------------------------------------------------
// AccelProfile
// ---------------------------------------------------------------------------

AccelProfile AccelProfile::constant(double f_hz, double amp_g,
                                    double duration_s) {
  AccelProfile p;
  p.drive_freq_hz = f_hz;
  p.segments.push_back({duration_s, amp_g});
  p.validate();
  return p;
}

AccelProfile AccelProfile::step(double f_hz, double amp0_g, double amp1_g,
                                double t_step_s, double t_end_s) {
  AccelProfile p;
  p.drive_freq_hz = f_hz;
  p.segments.push_back({t_step_s, amp0_g});
  p.segments.push_back({t_end_s - t_step_s, amp1_g});
  p.validate();
  return p;
}

AccelProfile AccelProfile::periodic_square(double f_hz, double amp_lo_g,
                                           double amp_hi_g, double period_s,
                                           double t_end_s) {
  AccelProfile p;
  p.drive_freq_hz = f_hz;
  if (!(period_s > 0)) throw ConfigError("profile: period must be > 0");
  double t = 0;
  bool low = true;
  while (t < t_end_s) {
    const double d = std::min(period_s / 2.0, t_end_s - t);
    p.segments.push_back({d, low ? amp_lo_g : amp_hi_g});
    low = !low;
    t += d;
  }
  p.validate();
  return p;
}

void AccelProfile::validate() const {
  if (!(drive_freq_hz > 0))
    throw ConfigError("profile: drive frequency must be > 0");
  if (segments.empty()) throw ConfigError("profile: no segments");
  for (const auto& s : segments) {
    if (!(s.duration_s > 0))
      throw ConfigError("profile: segment durations must be > 0");
    if (!(s.amplitude_g >= 0))
      throw ConfigError("profile: amplitudes must be >= 0");
  }
}

double AccelProfile::total_duration() const {
  double total = 0;
  for (const auto& s : segments) total += s.duration_s;
  return total;
}

double AccelProfile::amplitude_at(double t) const {
  double acc = 0;
  for (const auto& s : segments) {
    acc += s.duration_s;
    if (t < acc) return s.amplitude_g;
  }
  return segments.back().amplitude_g;  // hold last amplitude past the end
}

std::vector<double> AccelProfile::change_times() const {
  std::vector<double> out;
  double acc = 0;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    acc += segments[i].duration_s;
    if (segments[i].amplitude_g != segments[i + 1].amplitude_g)
      out.push_back(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SimResult accessors
// ---------------------------------------------------------------------------

namespace {

std::size_t window_begin(const std::vector<PeriodSample>& periods, int n) {
  if (periods.empty()) throw SimError("no completed drive periods recorded");
  const std::size_t count =
      std::min<std::size_t>(periods.size(), std::max(n, 1));
  return periods.size() - count;
}

}  // namespace

double SimResult::avg_power(int trailing_periods) const {
  const std::size_t b = window_begin(periods, trailing_periods);
  double acc = 0;
  for (std::size_t i = b; i < periods.size(); ++i) acc += periods[i].p_avg;
  return acc / static_cast<double>(periods.size() - b);
}

Complex SimResult::v_phasor(int trailing_periods) const {
  const std::size_t b = window_begin(periods, trailing_periods);
  Complex acc = 0;
  for (std::size_t i = b; i < periods.size(); ++i) acc += periods[i].v_phasor;
  return acc / static_cast<double>(periods.size() - b);
}

Complex SimResult::i_phasor(int trailing_periods) const {
  const std::size_t b = window_begin(periods, trailing_periods);
  Complex acc = 0;
  for (std::size_t i = b; i < periods.size(); ++i) acc += periods[i].i_phasor;
  return acc / static_cast<double>(periods.size() - b);
}

double SimResult::phase_lag(int trailing_periods) const {
  double d = std::arg(v_phasor(trailing_periods)) -
             std::arg(i_phasor(trailing_periods));
  while (d <= -kPi) d += 2.0 * kPi;
  while (d > kPi) d -= 2.0 * kPi;
  return d;
}

std::optional<double> settle_time(const SimResult& result, double fraction) {
  if (result.events.empty()) return std::nullopt;
  const double t_event = result.events.back();
  const double p_final = result.avg_power(10);
  double last_bad = t_event;
  for (const auto& ps : result.periods) {
    if (ps.t_end <= t_event) continue;
    if (std::abs(ps.p_avg - p_final) > fraction * std::abs(p_final))
      last_bad = ps.t_end;
  }
  return last_bad - t_event;
}

EmulatedLoad measure_emulated_load(const SimResult& result,
                                   int trailing_periods) {
  const double omega = 2.0 * kPi * result.drive_freq_hz;
  const Complex y = result.i_phasor(trailing_periods) /
                    result.v_phasor(trailing_periods);
  EmulatedLoad out;
  out.r_e_ohm = 1.0 / y.real();
  out.c_n_farad = y.imag() / omega;
  out.x_e_ohm = -1.0 / (omega * out.c_n_farad);
  return out;
}

// ---------------------------------------------------------------------------
// Shared integration machinery
// ---------------------------------------------------------------------------

namespace {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N, class F>
State<N> rk4_step(const State<N>& y, double t, double h, F&& f) {
  const State<N> k1 = f(t, y);
  State<N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  const State<N> k2 = f(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  const State<N> k3 = f(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
  const State<N> k4 = f(t + h, tmp);
  State<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

struct StepOutputs {
  double accel_g = 0, v_load = 0, i_load = 0, p_dc = 0;
  double x = 0, x_dot = 0;
  double p_in = 0, p_damp = 0, p_load = 0, stored = 0;
};

StepOutputs lerp(const StepOutputs& a, const StepOutputs& b, double th) {
  auto mix = [th](double u, double v) { return u + th * (v - u); };
  StepOutputs o;
  o.accel_g = mix(a.accel_g, b.accel_g);
  o.v_load = mix(a.v_load, b.v_load);
  o.i_load = mix(a.i_load, b.i_load);
  o.p_dc = mix(a.p_dc, b.p_dc);
  o.x = mix(a.x, b.x);
  o.x_dot = mix(a.x_dot, b.x_dot);
  o.p_in = mix(a.p_in, b.p_in);
  o.p_damp = mix(a.p_damp, b.p_damp);
  o.p_load = mix(a.p_load, b.p_load);
  o.stored = mix(a.stored, b.stored);
  return o;
}

// Accumulates per-period statistics with trapezoidal quadrature, splitting
// contributions exactly at period boundaries, and records decimated traces.
class Recorder {
 public:
  Recorder(double f_drive, const SimConfig& cfg, SimResult* out)
      : period_(1.0 / f_drive),
        omega_(2.0 * kPi * f_drive),
        decimation_(std::max(cfg.record_decimation, 1)),
        out_(out) {}

  void begin(double t, const StepOutputs& o) {
    t_prev_ = t;
    prev_ = o;
    next_boundary_ = t + period_;
    record_trace(t, o);
  }

  void step(double t, const StepOutputs& o) {
    while (next_boundary_ <= t) {
      const double span = t - t_prev_;
      const double th =
          span > 0 ? (next_boundary_ - t_prev_) / span : 1.0;
      const StepOutputs at_b = lerp(prev_, o, th);
      accumulate(t_prev_, prev_, next_boundary_, at_b);
      flush_period(next_boundary_, at_b);
      t_prev_ = next_boundary_;
      prev_ = at_b;
      next_boundary_ += period_;
    }
    accumulate(t_prev_, prev_, t, o);
    t_prev_ = t;
    prev_ = o;
    if (++count_ % decimation_ == 0) record_trace(t, o);
  }

 private:
  void accumulate(double t0, const StepOutputs& a, double t1,
                  const StepOutputs& b) {
    const double h = t1 - t0;
    if (!(h > 0)) return;
    auto trap = [h](double u, double v) { return 0.5 * h * (u + v); };
    e_p_ += trap(a.p_dc, b.p_dc);
    e_in_ += trap(a.p_in, b.p_in);
    e_damp_ += trap(a.p_damp, b.p_damp);
    e_load_ += trap(a.p_load, b.p_load);
    const double s0 = std::sin(omega_ * t0), c0 = std::cos(omega_ * t0);
    const double s1 = std::sin(omega_ * t1), c1 = std::cos(omega_ * t1);
    vs_ += trap(a.v_load * s0, b.v_load * s1);
    vc_ += trap(a.v_load * c0, b.v_load * c1);
    is_ += trap(a.i_load * s0, b.i_load * s1);
    ic_ += trap(a.i_load * c0, b.i_load * c1);
  }

  void flush_period(double t_b, const StepOutputs& at_b) {
    PeriodSample ps;
    ps.t_end = t_b;
    ps.p_avg = e_p_ / period_;
    ps.v_phasor = Complex(2.0 * vs_ / period_, 2.0 * vc_ / period_);
    ps.i_phasor = Complex(2.0 * is_ / period_, 2.0 * ic_ / period_);
    ps.e_in = e_in_;
    ps.e_damper = e_damp_;
    ps.e_load = e_load_;
    ps.stored_end = at_b.stored;
    out_->periods.push_back(ps);
    e_p_ = e_in_ = e_damp_ = e_load_ = 0;
    vs_ = vc_ = is_ = ic_ = 0;
  }

  void record_trace(double t, const StepOutputs& o) {
    auto& tr = out_->traces;
    tr.t.push_back(t);
    tr.accel_g.push_back(o.accel_g);
    tr.v_load.push_back(o.v_load);
    tr.i_load.push_back(o.i_load);
    tr.p_dc.push_back(o.p_dc);
    tr.x.push_back(o.x);
    tr.x_dot.push_back(o.x_dot);
  }

  double period_, omega_;
  long decimation_;
  SimResult* out_;
  double t_prev_ = 0, next_boundary_ = 0;
  StepOutputs prev_{};
  long count_ = 0;
  double e_p_ = 0, e_in_ = 0, e_damp_ = 0, e_load_ = 0;
  double vs_ = 0, vc_ = 0, is_ = 0, ic_ = 0;
};

HarvesterParams with_q(const HarvesterParams& h, const SimConfig& cfg) {
  HarvesterParams out = h;
  if (cfg.q_override) out.q_factor = *cfg.q_override;
  return out;
}

double end_time(const AccelProfile& profile, const SimConfig& cfg) {
  return cfg.t_end > 0 ? cfg.t_end : profile.total_duration();
}

std::vector<double> events_within(const AccelProfile& profile,
                                  double t_final) {
  std::vector<double> ev = profile.change_times();
  ev.erase(std::remove_if(ev.begin(), ev.end(),
                          [&](double t) { return t >= t_final; }),
           ev.end());
  return ev;
}

void check_finite(double t, std::initializer_list<double> vals) {
  for (double v : vals)
    if (!std::isfinite(v))
      throw SimError("integration failure: non-finite state at t = " +
                     std::to_string(t) + " s");
}

// Step sequence that never straddles a profile amplitude change.
class StepPlanner {
 public:
  StepPlanner(const AccelProfile& profile, double t_final, double dt)
      : marks_(profile.change_times()), t_final_(t_final), dt_(dt) {
    marks_.erase(std::remove_if(marks_.begin(), marks_.end(),
                                [&](double m) { return m >= t_final_; }),
                 marks_.end());
    marks_.push_back(t_final_);
  }

  // Next step size from time t; 0 when finished.
  double next(double t) const {
    if (t >= t_final_ - 1e-15) return 0.0;
    double stop = t_final_;
    for (double m : marks_) {
      if (m > t + 1e-15) {
        stop = m;
        break;
      }
    }
    return std::min(dt_, stop - t);
  }

 private:
  std::vector<double> marks_;
  double t_final_;
  double dt_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Behavioral simulation
// ---------------------------------------------------------------------------

namespace {

struct LinearLoad {
  double conductance;   // 1/R
  double capacitance;   // parallel C (negative for emulated reactance)
  double inductance;    // parallel L; exclusive with the capacitance
};

LinearLoad resolve_linear_load(const BehavioralLoad& load, double omega,
                               double c_p) {
  if (const auto* zl = std::get_if<ParallelImpedance>(&load)) {
    if (!(zl->r_load > 0) || zl->x_load == 0)
      throw ConfigError("behavioral load: need r_load > 0 and x_load != 0");
    const double c_equiv = -1.0 / (omega * zl->x_load);
    // A positive reactance below 1/(w C_p) would overcompensate C_p as a
    // negative capacitance; realize it as an inductor instead.
    if (zl->x_load > 0 && c_p + c_equiv <= 1e-3 * c_p)
      return {1.0 / zl->r_load, 0.0, zl->x_load / omega};
    return {1.0 / zl->r_load, c_equiv, 0.0};
  }
  const auto& em = std::get<EmulatedLoad>(load);
  if (!(em.r_e_ohm > 0))
    throw ConfigError("behavioral load: r_e must be > 0");
  return {1.0 / em.r_e_ohm, em.c_n_farad, 0.0};
}

SimResult simulate_linear_load(const HarvesterParams& h_in,
                               const LinearLoad& load,
                               const AccelProfile& profile,
                               const SimConfig& cfg) {
  const HarvesterParams h = with_q(h_in, cfg);
  profile.validate();
  if (!(cfg.dt > 0)) throw ConfigError("sim: dt must be > 0");
  const MechanicalParams m = derive_mechanical(h);
  const double omega = 2.0 * kPi * profile.drive_freq_hz;
  const bool inductive = load.inductance > 0;
  const double c_node = h.c_p_farad + load.capacitance;
  if (!inductive && c_node < -1e-3 * h.c_p_farad)
    throw SimError(
        "emulated negative capacitance overcompensates C_p; the terminal "
        "node is unstable");
  const bool reduced =
      !inductive && std::abs(c_node) <= 1e-3 * h.c_p_farad;
  const double r_load = 1.0 / load.conductance;

  SimResult out;
  out.drive_freq_hz = profile.drive_freq_hz;
  Recorder rec(profile.drive_freq_hz, cfg, &out);
  const double t_final = end_time(profile, cfg);
  out.events = events_within(profile, t_final);
  StepPlanner plan(profile, t_final, cfg.dt);

  const double alpha = m.force_factor;
  auto accel_si = [&](double t) {
    return profile.amplitude_at(t) * kGravity * std::sin(omega * t);
  };

  if (reduced) {
    // Exact cancellation of C_p: the terminal voltage is algebraic,
    // v = R * alpha * x_dot, and the load resistance appears as damping.
    auto deriv = [&](double t, const State<2>& y) -> State<2> {
      const double a = accel_si(t);
      return {y[1], (m.mass * a - (m.damping + alpha * alpha * r_load) * y[1] -
                     m.stiffness * y[0]) /
                        m.mass};
    };
    auto outputs = [&](double t, const State<2>& y) {
      const double a = accel_si(t);
      const double xdd = deriv(t, y)[1];
      StepOutputs o;
      o.accel_g = profile.amplitude_at(t) * std::sin(omega * t);
      o.x = y[0];
      o.x_dot = y[1];
      o.v_load = r_load * alpha * y[1];
      const double v_dot = r_load * alpha * xdd;
      o.i_load = alpha * y[1] - h.c_p_farad * v_dot;
      o.p_load = o.v_load * o.i_load;
      o.p_dc = o.p_load;
      o.p_in = m.mass * a * y[1];
      o.p_damp = m.damping * y[1] * y[1];
      o.stored = 0.5 * m.mass * y[1] * y[1] + 0.5 * m.stiffness * y[0] * y[0] +
                 0.5 * h.c_p_farad * o.v_load * o.v_load;
      return o;
    };
    State<2> y{0, 0};
    double t = 0;
    rec.begin(t, outputs(t, y));
    while (double hstep = plan.next(t)) {
      y = rk4_step(y, t, hstep, deriv);
      t += hstep;
      check_finite(t, {y[0], y[1]});
      rec.step(t, outputs(t, y));
    }
    return out;
  }

  if (inductive) {
    // Parallel R and L across the terminals; the inductor current is a
    // fourth state.
    auto deriv = [&](double t, const State<4>& y) -> State<4> {
      const double a = accel_si(t);
      const double xdd = (m.mass * a - m.damping * y[1] -
                          m.stiffness * y[0] - alpha * y[2]) /
                         m.mass;
      const double vd =
          (alpha * y[1] - load.conductance * y[2] - y[3]) / h.c_p_farad;
      return {y[1], xdd, vd, y[2] / load.inductance};
    };
    auto outputs = [&](double t, const State<4>& y) {
      const double a = accel_si(t);
      StepOutputs o;
      o.accel_g = profile.amplitude_at(t) * std::sin(omega * t);
      o.x = y[0];
      o.x_dot = y[1];
      o.v_load = y[2];
      o.i_load = load.conductance * y[2] + y[3];
      o.p_load = o.v_load * o.i_load;
      o.p_dc = o.p_load;
      o.p_in = m.mass * a * y[1];
      o.p_damp = m.damping * y[1] * y[1];
      o.stored = 0.5 * m.mass * y[1] * y[1] +
                 0.5 * m.stiffness * y[0] * y[0] +
                 0.5 * h.c_p_farad * y[2] * y[2];
      return o;
    };
    State<4> y{0, 0, 0, 0};
    double t = 0;
    rec.begin(t, outputs(t, y));
    while (double hstep = plan.next(t)) {
      y = rk4_step(y, t, hstep, deriv);
      t += hstep;
      check_finite(t, {y[0], y[1], y[2], y[3]});
      rec.step(t, outputs(t, y));
    }
    return out;
  }

  auto deriv = [&](double t, const State<3>& y) -> State<3> {
    const double a = accel_si(t);
    const double xdd = (m.mass * a - m.damping * y[1] - m.stiffness * y[0] -
                        alpha * y[2]) /
                       m.mass;
    const double vd = (alpha * y[1] - load.conductance * y[2]) / c_node;
    return {y[1], xdd, vd};
  };
  auto outputs = [&](double t, const State<3>& y) {
    const double a = accel_si(t);
    const double vd = deriv(t, y)[2];
    StepOutputs o;
    o.accel_g = profile.amplitude_at(t) * std::sin(omega * t);
    o.x = y[0];
    o.x_dot = y[1];
    o.v_load = y[2];
    o.i_load = alpha * y[1] - h.c_p_farad * vd;
    o.p_load = o.v_load * o.i_load;
    o.p_dc = o.p_load;
    o.p_in = m.mass * a * y[1];
    o.p_damp = m.damping * y[1] * y[1];
    o.stored = 0.5 * m.mass * y[1] * y[1] + 0.5 * m.stiffness * y[0] * y[0] +
               0.5 * h.c_p_farad * y[2] * y[2];
    return o;
  };
  State<3> y{0, 0, 0};
  double t = 0;
  rec.begin(t, outputs(t, y));
  while (double hstep = plan.next(t)) {
    y = rk4_step(y, t, hstep, deriv);
    t += hstep;
    check_finite(t, {y[0], y[1], y[2]});
    rec.step(t, outputs(t, y));
  }
  return out;
}

}  // namespace

SimResult simulate_generator_tracked(
    const HarvesterParams& h_in, const AccelProfile& profile,
    const SimConfig& cfg, double v0, double phi0,
    const std::function<void(int, const std::vector<PeriodSample>&, double&,
                             double&)>& on_period) {
  const HarvesterParams h = with_q(h_in, cfg);
  profile.validate();
  if (!(cfg.dt > 0)) throw ConfigError("sim: dt must be > 0");
  if (v0 < 0) throw ConfigError("generator amplitude must be >= 0");
  const MechanicalParams m = derive_mechanical(h);
  const double omega = 2.0 * kPi * profile.drive_freq_hz;
  const double alpha = m.force_factor;

  SimResult out;
  out.drive_freq_hz = profile.drive_freq_hz;
  Recorder rec(profile.drive_freq_hz, cfg, &out);
  const double t_final = end_time(profile, cfg);
  out.events = events_within(profile, t_final);
  StepPlanner plan(profile, t_final, cfg.dt);

  double v_amp = v0, phi = phi0;
  auto v_gen = [&](double t) { return v_amp * std::sin(omega * t + phi); };
  auto v_gen_dot = [&](double t) {
    return v_amp * omega * std::cos(omega * t + phi);
  };
  auto accel_si = [&](double t) {
    return profile.amplitude_at(t) * kGravity * std::sin(omega * t);
  };
  auto deriv = [&](double t, const State<2>& y) -> State<2> {
    return {y[1], (m.mass * accel_si(t) - m.damping * y[1] -
                   m.stiffness * y[0] - alpha * v_gen(t)) /
                      m.mass};
  };
  auto outputs = [&](double t, const State<2>& y) {
    StepOutputs o;
    o.accel_g = profile.amplitude_at(t) * std::sin(omega * t);
    o.x = y[0];
    o.x_dot = y[1];
    o.v_load = v_gen(t);
    o.i_load = alpha * y[1] - h.c_p_farad * v_gen_dot(t);
    o.p_load = o.v_load * o.i_load;
    o.p_dc = o.p_load;
    o.p_in = m.mass * accel_si(t) * y[1];
    o.p_damp = m.damping * y[1] * y[1];
    o.stored = 0.5 * m.mass * y[1] * y[1] + 0.5 * m.stiffness * y[0] * y[0] +
               0.5 * h.c_p_farad * o.v_load * o.v_load;
    return o;
  };

  State<2> y{0, 0};
  double t = 0;
  rec.begin(t, outputs(t, y));
  std::size_t seen_periods = 0;
  while (double hstep = plan.next(t)) {
    y = rk4_step(y, t, hstep, deriv);
    t += hstep;
    check_finite(t, {y[0], y[1]});
    rec.step(t, outputs(t, y));
    if (on_period && out.periods.size() > seen_periods) {
      seen_periods = out.periods.size();
      on_period(static_cast<int>(seen_periods), out.periods, v_amp, phi);
      if (v_amp < 0) v_amp = 0;
    }
  }
  return out;
}

SimResult simulate_behavioral(const HarvesterParams& h,
                              const BehavioralLoad& load,
                              const AccelProfile& profile,
                              const SimConfig& cfg) {
  if (const auto* gen = std::get_if<VoltageGenerator>(&load))
    return simulate_generator_tracked(h, profile, cfg, gen->v_load,
                                      gen->phi_load, nullptr);
  const double omega = 2.0 * kPi * profile.drive_freq_hz;
  return simulate_linear_load(
      h, resolve_linear_load(load, omega, h.c_p_farad), profile, cfg);
}

SimResult run_fixed_generator(const HarvesterParams& h, double v_fixed,
                              double phi_fixed, const AccelProfile& profile,
                              const SimConfig& cfg) {
  return simulate_generator_tracked(h, profile, cfg, v_fixed, phi_fixed,
                                    nullptr);
}

// ---------------------------------------------------------------------------
// Switched simulation
// ---------------------------------------------------------------------------

namespace {

enum class SwitchPhase {
  kConductUp,    // leg tied to -V_n: inductor current driven up
  kConductDown,  // leg tied to +V_dc: inductor current driven down
  kDead,         // both switches off, diode freewheel
};

}  // namespace

SimResult simulate_switched(const HarvesterParams& h_in,
                            const ControllerParams& cp,
                            const AccelProfile& profile,
                            const SimConfig& cfg) {
  const HarvesterParams h = with_q(h_in, cfg);
  profile.validate();
  cp.validate();
  if (!(cfg.dt > 0)) throw ConfigError("sim: dt must be > 0");
  if (cp.dead_time_s < cfg.dt)
    throw ConfigError(
        "switched mode: dt must not exceed the controller dead time");
  const MechanicalParams m = derive_mechanical(h);
  const double alpha = m.force_factor;
  const double omega = 2.0 * kPi * profile.drive_freq_hz;
  const HysteresisThresholds th = hysteresis_thresholds(cp);
  const double gain_e = cp.r_f_ohm * cp.r_m_ohm / cp.r_y_ohm;
  const bool exact = cfg.conditioning == ConditioningMode::exact;

  // Reference branch of the approximate conditioning law: the simplified
  // transfer's derivative term runs through a one-pole filter, and the
  // branch admittance is rescaled so it equals the design (R_e, C_n) at the
  // drive frequency exactly.
  const EmulatedLoad target = emulated_admittance(cp, omega);
  const double w_d =
      2.0 * kPi * (cfg.deriv_corner_hz > 0 ? cfg.deriv_corner_hz
                                           : profile.drive_freq_hz);
  const double corner_ratio = omega / w_d;
  const double c_ref = target.c_n_farad * (1.0 + corner_ratio * corner_ratio);
  const double g_ref =
      1.0 / target.r_e_ohm - omega * omega * target.c_n_farad / w_d;

  // Exact-mode op-amp filter constants.
  const double beta = cp.r_b_ohm / (cp.r_a_ohm + cp.r_b_ohm);

  // State vector: x, x_dot, v_p, i_lb, w (conditioning state: the one-pole
  // filter state in approximate mode, the C_x capacitor voltage in exact
  // mode).
  using S = State<5>;

  auto i_ref_of = [&](const S& y) {
    return g_ref * y[2] + c_ref * w_d * (y[2] - y[4]);
  };
  auto v_e_of = [&](const S& y) {
    if (!exact) return -gain_e * (y[3] - i_ref_of(y));
    const double v_minus = beta * y[2];
    const double i_x = ((y[2] - v_minus) - y[4]) / cp.r_x_ohm;
    return v_minus -
           cp.r_f_ohm * ((cp.r_m_ohm * y[3] - v_minus) / cp.r_y_ohm + i_x);
  };

  auto accel_si = [&](double t) {
    return profile.amplitude_at(t) * kGravity * std::sin(omega * t);
  };

  SimResult out;
  out.drive_freq_hz = profile.drive_freq_hz;
  out.min_conduction_interval = std::numeric_limits<double>::infinity();
  Recorder rec(profile.drive_freq_hz, cfg, &out);
  const double t_final = end_time(profile, cfg);
  out.events = events_within(profile, t_final);
  StepPlanner plan(profile, t_final, cfg.dt);
  const double diag_window_start =
      t_final - cfg.avg_window_periods / profile.drive_freq_hz;

  SwitchPhase phase = SwitchPhase::kConductUp;
  SwitchPhase pending = SwitchPhase::kConductDown;
  double dead_left = 0;
  double last_commit = -1;

  S y{0, 0, 0, 0, 0};
  double t = 0;

  auto rail_voltage = [&](const S& s) {
    switch (phase) {
      case SwitchPhase::kConductUp:
        return -cp.v_n;
      case SwitchPhase::kConductDown:
        return cp.v_dc;
      case SwitchPhase::kDead:
        return s[3] >= 0 ? cp.v_dc : -cp.v_n;
    }
    return 0.0;
  };
  auto node_voltage = [&](const S& s) {
    // Voltage at the switching node; diode conduction adds the drop.
    if (phase != SwitchPhase::kDead) return rail_voltage(s);
    return s[3] >= 0 ? cp.v_dc + cfg.diode_drop_v
                     : -cp.v_n - cfg.diode_drop_v;
  };

  auto outputs = [&](double tt, const S& s) {
    StepOutputs o;
    o.accel_g = profile.amplitude_at(tt) * std::sin(omega * tt);
    o.x = s[0];
    o.x_dot = s[1];
    o.v_load = s[2];
    o.i_load = s[3];
    o.p_dc = rail_voltage(s) * s[3];
    o.p_load = s[2] * s[3];
    o.p_in = m.mass * accel_si(tt) * s[1];
    o.p_damp = m.damping * s[1] * s[1];
    o.stored = 0.5 * m.mass * s[1] * s[1] + 0.5 * m.stiffness * s[0] * s[0] +
               0.5 * h.c_p_farad * s[2] * s[2] +
               0.5 * cp.l_b_henry * s[3] * s[3];
    return o;
  };

  rec.begin(t, outputs(t, y));

  auto integrate = [&](const S& s, double t0, double hsub) {
    const double v_sw = node_voltage(s);
    auto deriv = [&](double tt, const S& yy) -> S {
      const double a = accel_si(tt);
      const double xdd = (m.mass * a - m.damping * yy[1] -
                          m.stiffness * yy[0] - alpha * yy[2]) /
                         m.mass;
      const double vpd = (alpha * yy[1] - yy[3]) / h.c_p_farad;
      const double ild =
          (yy[2] - cp.r_m_ohm * yy[3] - v_sw) / cp.l_b_henry;
      double wd_state;
      if (exact) {
        const double v_minus = beta * yy[2];
        wd_state = ((yy[2] - v_minus) - yy[4]) / (cp.r_x_ohm * cp.c_x_farad);
      } else {
        wd_state = w_d * (yy[2] - yy[4]);
      }
      return {yy[1], xdd, vpd, ild, wd_state};
    };
    return rk4_step(s, t0, hsub, deriv);
  };

  const double tiny = cfg.dt * 1e-9;
  while (double hstep = plan.next(t)) {
    double remaining = hstep;
    while (remaining > tiny) {
      double hsub = remaining;
      bool expiry = false;
      if (phase == SwitchPhase::kDead && dead_left < hsub) {
        hsub = std::max(dead_left, 0.0);
        expiry = true;
        if (hsub <= tiny) {
          phase = pending;
          dead_left = 0;
          continue;
        }
      }
      const double ve0 = v_e_of(y);
      S y_try = integrate(y, t, hsub);
      const double ve1 = v_e_of(y_try);

      bool crossed = false;
      double trigger = 0;
      if (phase == SwitchPhase::kConductUp && ve1 <= th.v_tl) {
        crossed = true;
        trigger = th.v_tl;
      } else if (phase == SwitchPhase::kConductDown && ve1 >= th.v_th) {
        crossed = true;
        trigger = th.v_th;
      }

      if (crossed) {
        double frac = (ve1 != ve0) ? (trigger - ve0) / (ve1 - ve0) : 1.0;
        frac = std::clamp(frac, 0.0, 1.0);
        const double hcut = frac * hsub;
        if (hcut > tiny) {
          y = integrate(y, t, hcut);
          t += hcut;
          check_finite(t, {y[0], y[1], y[2], y[3], y[4]});
          rec.step(t, outputs(t, y));
        }
        pending = phase == SwitchPhase::kConductUp ? SwitchPhase::kConductDown
                                                   : SwitchPhase::kConductUp;
        phase = SwitchPhase::kDead;
        dead_left = cp.dead_time_s;
        if (last_commit >= 0)
          out.min_conduction_interval =
              std::min(out.min_conduction_interval, t - last_commit);
        last_commit = t;
        ++out.switch_count;
        remaining -= hcut;
        continue;
      }

      y = y_try;
      t += hsub;
      check_finite(t, {y[0], y[1], y[2], y[3], y[4]});
      rec.step(t, outputs(t, y));
      if (phase == SwitchPhase::kDead) {
        dead_left -= hsub;
        if (expiry || dead_left <= tiny) {
          phase = pending;
          dead_left = 0;
        }
      }
      remaining -= hsub;

      if (t >= diag_window_start) {
        const double ve = v_e_of(y);
        out.max_tracking_error =
            std::max(out.max_tracking_error, std::abs(ve) / gain_e);
        if (phase != SwitchPhase::kDead)
          out.max_ve_excursion =
              std::max(out.max_ve_excursion, std::abs(ve) - th.v_th);
      }
    }
  }

  if (out.switch_count > 1 &&
      out.min_conduction_interval < 20.0 * cfg.dt)
    out.warnings.push_back(
        "dt resolves the shortest switching interval with fewer than 20 "
        "steps; reduce sim.dt");
  return out;
}

// ---------------------------------------------------------------------------
// Quality-factor calibration
// ---------------------------------------------------------------------------

double calibrate_q(const HarvesterParams& h, double target_settle_s,
                   double fraction, double q_lo, double q_hi, int iterations) {
  h.validate();
  if (!(target_settle_s > 0))
    throw ConfigError("calibrate_q: target must be > 0");
  const double t_pre = 0.1;
  const AccelProfile profile = AccelProfile::step(
      h.f_res_hz, 0.0, 1.0, t_pre, t_pre + std::max(6.0 * target_settle_s, 0.5));
  auto settle_for = [&](double q) {
    HarvesterParams hq = h;
    hq.q_factor = q;
    const OptimalImpedance opt = optimal_impedance(hq);
    SimConfig cfg;
    cfg.dt = 2e-6;
    const SimResult r = simulate_behavioral(
        hq, ParallelImpedance{opt.r_par, opt.x_par}, profile, cfg);
    return settle_time(r, fraction).value();
  };
  double lo = q_lo, hi = q_hi;
  if (settle_for(lo) > target_settle_s)
    throw ConfigError("calibrate_q: lower bound already settles too slowly");
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    (settle_for(mid) < target_settle_s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rpveh
