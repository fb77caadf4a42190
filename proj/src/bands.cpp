#include "hazardforge/bands.hpp"

#include <algorithm>
#include <cmath>

#include "hazardforge/distributions.hpp"
#include "hazardforge/errors.hpp"
#include "hazardforge/parallel.hpp"
#include "hazardforge/rng.hpp"

namespace hazardforge {
namespace {

constexpr std::size_t kChunk = 512;

// Largest value of a Brownian bridge pinned at a and b over a cell of length
// h, drawn from the reflection law P(M >= m) = exp(-2(m - a)(m - b)/h).
double cell_maximum(double a, double b, double h, double u) {
  const double d = a - b;
  return 0.5 * (a + b + std::sqrt(d * d - 2.0 * h * std::log(u)));
}

}  // namespace

double band_critical_value(const BandSpec& spec, double c1, double c2) {
  if (!(spec.conf_level > 0.0 && spec.conf_level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1)");
  }
  if (!(c1 < c2)) throw DomainError("band needs c1 < c2");
  if (c1 < 0.0 || c2 > 1.0) throw DomainError("band needs 0 <= c1 < c2 <= 1");
  const bool ep = spec.type == BandType::equal_precision;
  if (ep && (c1 <= 0.0 || c2 >= 1.0)) {
    throw DomainError("equal-precision band needs 0 < c1 < c2 < 1");
  }
  if (spec.mc_reps == 0 || spec.grid_points < 2) {
    throw DomainError("band simulation needs mc_reps >= 1 and grid_points >= 2");
  }
  const std::size_t cells = spec.grid_points;
  const double h = 1.0 / static_cast<double>(cells);
  // nodes i/cells on a fixed global grid, so enlarging [c1, c2] only adds terms
  const auto first = static_cast<std::size_t>(std::ceil(c1 * static_cast<double>(cells) - 1e-9));
  const auto last = std::min(
      cells, static_cast<std::size_t>(std::floor(c2 * static_cast<double>(cells) + 1e-9)));
  if (first > last) throw DomainError("band interval is narrower than the simulation grid");

  std::vector<double> weight(cells + 1, 1.0);
  std::vector<double> mid_weight(cells, 1.0);
  if (ep) {
    for (std::size_t i = first; i <= last; ++i) {
      const double x = static_cast<double>(i) * h;
      weight[i] = 1.0 / std::sqrt(x * (1.0 - x));
    }
    for (std::size_t i = first; i < last; ++i) {
      const double x = (static_cast<double>(i) + 0.5) * h;
      mid_weight[i] = 1.0 / std::sqrt(x * (1.0 - x));
    }
  }

  std::vector<double> sup(spec.mc_reps);
  const std::size_t chunks = (spec.mc_reps + kChunk - 1) / kChunk;
  const double step_sd = std::sqrt(h);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = Rng::stream(spec.seed, c);
    std::vector<double> walk(cells + 1);
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(spec.mc_reps, begin + kChunk);
    for (std::size_t r = begin; r < end; ++r) {
      walk[0] = 0.0;
      for (std::size_t i = 1; i <= cells; ++i) walk[i] = walk[i - 1] + step_sd * rng.normal();
      const double w1 = walk[cells];
      for (std::size_t i = 0; i <= cells; ++i) walk[i] -= static_cast<double>(i) * h * w1;
      double best = 0.0;
      for (std::size_t i = first; i <= last; ++i) {
        best = std::max(best, std::abs(walk[i]) * weight[i]);
      }
      const std::uint64_t key = stream_seed(spec.seed ^ 0xB5AD4ECEDA1CE2A9ULL, r) * cells;
      for (std::size_t i = first; i < last; ++i) {
        double a = walk[i];
        double b = walk[i + 1];
        // refine on the side the path is on; the other side is far below the sup
        if (a + b < 0.0) {
          a = -a;
          b = -b;
        }
        const double m = cell_maximum(a, b, h, hashed_uniform(key + i));
        best = std::max(best, m * mid_weight[i]);
      }
      sup[r] = best;
    }
  });
  std::sort(sup.begin(), sup.end());
  const double pos = spec.conf_level * static_cast<double>(spec.mc_reps);
  const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(pos - 1e-9))) - 1;
  return sup[std::min(k, spec.mc_reps - 1)];
}

Band simultaneous_band(const CurveEstimate& curve, const BandSpec& spec) {
  if (!(spec.t_lo < spec.t_hi)) throw DomainError("band interval is empty");
  if (spec.t_lo < 0.0 || spec.t_hi > curve.max_time) {
    throw DomainError("band interval must lie inside the observed range");
  }
  const double n = static_cast<double>(curve.n);
  Band band;
  band.times.push_back(spec.t_lo);
  const auto jt = curve.estimate.jump_times();
  for (double t : jt) {
    if (t > spec.t_lo && t <= spec.t_hi) band.times.push_back(t);
  }
  auto c_hat = [&](double t) {
    const double s2 = curve.sigma2.value(t);
    return n * s2 / (1.0 + n * s2);
  };
  if (std::isinf(curve.sigma2.value(spec.t_hi))) {
    throw DomainError("band interval reaches a time with an empty risk set");
  }
  band.c2 = c_hat(spec.t_hi);
  band.c1 = c_hat(spec.t_lo);
  if (spec.type == BandType::equal_precision && band.c1 == 0.0) {
    // the band has zero width until the first positive ĉ
    for (double t : band.times) {
      if (c_hat(t) > 0.0) {
        band.c1 = c_hat(t);
        break;
      }
    }
  }
  const bool collapsed = band.c2 == 0.0 || band.c1 >= band.c2;
  if (!collapsed) band.critical_value = band_critical_value(spec, band.c1, band.c2);

  const bool survival = curve.kind == CurveKind::survival;
  for (double t : band.times) {
    const double est = curve.estimate.value(t);
    const double s2 = curve.sigma2.value(t);
    double half = 0.0;
    if (!collapsed) {
      if (spec.type == BandType::equal_precision) {
        half = band.critical_value * std::sqrt(s2);
      } else {
        half = band.critical_value * (1.0 + n * s2) / std::sqrt(n);
      }
      if (survival) half *= est;
    }
    double lo = est - half;
    double hi = est + half;
    if (survival) {
      lo = std::clamp(lo, 0.0, 1.0);
      hi = std::clamp(hi, 0.0, 1.0);
    } else {
      lo = std::max(lo, 0.0);
    }
    band.lo.push_back(lo);
    band.hi.push_back(hi);
  }
  return band;
}

}  // namespace hazardforge
