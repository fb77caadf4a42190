#pragma once

#include <cstdint>
#include <vector>

#include "hazardforge/nonparam.hpp"

namespace hazardforge {

enum class BandType { equal_precision, hall_wellner };

struct BandSpec {
  BandType type = BandType::hall_wellner;
  double conf_level = 0.95;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t mc_reps = 100000;
  std::size_t grid_points = 1000;
  std::uint64_t seed = 0;
};

/// Upper (1 - conf) quantile of sup_{x in [c1, c2]} |W0(x)| w(x) over Monte
/// Carlo Brownian bridges. Hall-Wellner: w = 1. Equal precision:
/// w = 1/sqrt(x(1 - x)), which needs 0 < c1 < c2 < 1.
double band_critical_value(const BandSpec& spec, double c1, double c2);

struct Band {
  std::vector<double> times;
  std::vector<double> lo;
  std::vector<double> hi;
  double critical_value = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Band over [t_lo, t_hi] evaluated at t_lo and every jump of the estimate
/// inside (t_lo, t_hi].
Band simultaneous_band(const CurveEstimate& curve, const BandSpec& spec);

}  // namespace hazardforge
