#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace rpveh {

// All phasors are complex doubles referenced to the drive acceleration:
// a signal s(t) = S*sin(w*t + phi) has phasor S*exp(j*phi), so the
// acceleration a(t) = A*sin(w*t) itself is the real phasor A.
using Complex = std::complex<double>;

// Standard gravity used when converting g-denominated quantities to SI.
inline constexpr double kGravity = 9.81;  // m/s^2

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

// Invalid user-facing configuration (bad parameters, malformed files).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A linear solve hit a numerically singular network.
class SingularNetworkError : public std::runtime_error {
 public:
  explicit SingularNetworkError(const std::string& what)
      : std::runtime_error(what) {}
};

// Component sizing could not satisfy a design relation.
class SizingError : public std::runtime_error {
 public:
  SizingError(const std::string& relation, const std::string& what)
      : std::runtime_error(what), relation_(relation) {}
  const std::string& relation() const { return relation_; }

 private:
  std::string relation_;
};

// Time-domain integration failed (non-finite state, impossible setup).
class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

// A measured/synthetic power surface peaks on its boundary; the optimum is
// not bracketed and the sweep must be extended.
class UnbracketedOptimumError : public std::runtime_error {
 public:
  explicit UnbracketedOptimumError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace rpveh
