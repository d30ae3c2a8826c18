#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace asv {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGravity = 9.81;  // m/s^2

// Simulation step used everywhere unless a config overrides it.
inline constexpr double kDefaultDt = 0.02;  // s

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);  // lands in [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Configuration / input-file problems: caller error, CLI exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed data files: caller error, CLI exit code 1.
struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace asv
