#include "hazardforge/nonparam.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "hazardforge/distributions.hpp"
#include "hazardforge/errors.hpp"
#include "hazardforge/product_integral.hpp"

namespace hazardforge {
namespace {

std::span<const double> time_span(const RightCensoredSample& s) {
  return {s.time().data(), s.size()};
}

std::vector<int> status_vector(const RightCensoredSample& s) {
  return {s.status().begin(), s.status().end()};
}

double max_of(std::span<const double> times) {
  return times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
}

}  // namespace

CurveEstimate nelson_aalen(std::span<const double> times, std::span<const int> status) {
  if (times.empty()) throw ValidationError("sample must contain at least one record");
  const auto table = risk_table(times, status);
  std::vector<double> jt;
  std::vector<double> dA;
  std::vector<double> dV;
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double d = table.events[k];
    const double y = table.at_risk[k];
    if (d == 0.0 || y == 0.0) continue;
    jt.push_back(table.time[k]);
    dA.push_back(d / y);
    dV.push_back(d / (y * y));
  }
  CurveEstimate out;
  out.kind = CurveKind::cumulative_hazard;
  out.estimate = StepFunction::from_jumps(jt, std::move(dA));
  out.variance = StepFunction::from_jumps(std::move(jt), std::move(dV));
  out.sigma2 = out.variance;
  out.n = times.size();
  out.max_time = max_of(times);
  return out;
}

CurveEstimate nelson_aalen(const RightCensoredSample& sample) {
  const auto status = status_vector(sample);
  return nelson_aalen(time_span(sample), status);
}

CurveEstimate kaplan_meier(std::span<const double> times, std::span<const int> status) {
  const auto na = nelson_aalen(times, status);
  const auto table = risk_table(times, status);
  CurveEstimate out;
  out.kind = CurveKind::survival;
  // the same stored NA jumps feed the product, so KM == ∏(1 - dÂ) bit for bit
  out.estimate = product_integral_curve(na.estimate);
  std::vector<double> jt;
  std::vector<double> g;
  std::vector<double> v;
  double greenwood = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double d = table.events[k];
    const double y = table.at_risk[k];
    if (d == 0.0 || y == 0.0) continue;
    if (y == d) {
      greenwood = kInf;
      if (!out.saturation_time) out.saturation_time = table.time[k];
    } else {
      greenwood += d / (y * (y - d));
    }
    const double s = out.estimate.value(table.time[k]);
    jt.push_back(table.time[k]);
    g.push_back(greenwood);
    v.push_back(s == 0.0 ? 0.0 : s * s * greenwood);
  }
  out.sigma2 = StepFunction::from_values(jt, std::move(g));
  out.variance = StepFunction::from_values(std::move(jt), std::move(v));
  out.n = times.size();
  out.max_time = max_of(times);
  return out;
}

CurveEstimate kaplan_meier(const RightCensoredSample& sample) {
  const auto status = status_vector(sample);
  return kaplan_meier(time_span(sample), status);
}

double na_bias_bound(std::span<const RightCensoredSample> replicates,
                     const std::function<double(double)>& alpha0, double t) {
  if (replicates.empty()) throw DomainError("bias bound needs at least one replicate");
  if (!(t >= 0.0)) throw DomainError("bias bound needs t >= 0");
  auto hazard = [&](double s) {
    const double a = alpha0(s);
    if (a < 0.0 || std::isnan(a)) throw DomainError("hazard must be nonnegative");
    return a;
  };
  // P̂(Y(s) = 0) is a step function of s: replicate r contributes on (max_r, t]
  double total = 0.0;
  for (const auto& rep : replicates) {
    const double last = rep.time().maxCoeff();
    if (last >= t) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(hazard, last, t, 15,
                                                                          1e-12);
  }
  return total / static_cast<double>(replicates.size());
}

Interval pointwise_ci(CurveKind kind, double est, double sigma, double conf_level,
                      Transform transform) {
  const double z = normal_critical(conf_level);
  if (kind == CurveKind::cumulative_hazard) {
    switch (transform) {
      case Transform::linear:
        return {std::max(0.0, est - z * sigma), est + z * sigma};
      case Transform::loglog: {
        // log transform of Â
        if (!(est > 0.0)) throw DomainError("log-transformed interval needs a positive estimate");
        const double f = std::exp(z * sigma / est);
        return {est / f, est * f};
      }
      case Transform::arcsin_sqrt:
        throw DomainError("arcsine transform applies to survival curves only");
    }
  }
  const double se = est * sigma;
  switch (transform) {
    case Transform::linear:
      return {std::clamp(est - z * se, 0.0, 1.0), std::clamp(est + z * se, 0.0, 1.0)};
    case Transform::loglog: {
      if (!(est > 0.0 && est < 1.0)) throw DomainError("log-log interval needs 0 < S < 1");
      const double theta = std::log(-std::log(est));
      const double half = z * sigma / std::abs(std::log(est));
      return {std::exp(-std::exp(theta + half)), std::exp(-std::exp(theta - half))};
    }
    case Transform::arcsin_sqrt: {
      if (!(est > 0.0 && est < 1.0)) throw DomainError("arcsine interval needs 0 < S < 1");
      const double theta = std::asin(std::sqrt(est));
      const double half = 0.5 * z * sigma * std::sqrt(est / (1.0 - est));
      const double lo = std::max(0.0, theta - half);
      const double hi = std::min(std::numbers::pi / 2.0, theta + half);
      return {std::sin(lo) * std::sin(lo), std::sin(hi) * std::sin(hi)};
    }
  }
  throw DomainError("unknown transform");
}

Interval pointwise_ci(const CurveEstimate& curve, double t, double conf_level,
                      Transform transform) {
  const double est = curve.estimate.value(t);
  const double s2 = curve.sigma2.value(t);
  if (curve.kind == CurveKind::survival && transform != Transform::linear &&
      (est <= 0.0 || est >= 1.0)) {
    throw DomainError("transformed interval needs 0 < S(t) < 1");
  }
  if (std::isinf(s2)) return {0.0, curve.kind == CurveKind::survival ? 1.0 : kInf};
  return pointwise_ci(curve.kind, est, std::sqrt(s2), conf_level, transform);
}

std::vector<double> smoothed_hazard(const StepFunction& cumulative, double bandwidth,
                                    Kernel kernel, std::span<const double> grid) {
  if (!(bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
  const auto times = cumulative.jump_times();
  const auto jumps = cumulative.jump_sizes();
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double t = grid[g];
    auto lo = std::lower_bound(times.begin(), times.end(), t - bandwidth);
    double sum = 0.0;
    for (auto it = lo; it != times.end() && *it <= t + bandwidth; ++it) {
      const auto k = static_cast<std::size_t>(it - times.begin());
      sum += kernel_weight(kernel, (t - *it) / bandwidth) * jumps[k];
    }
    out[g] = sum / bandwidth;
  }
  return out;
}

std::vector<double> smoothed_hazard(const CurveEstimate& curve, double bandwidth, Kernel kernel,
                                    std::span<const double> grid) {
  if (curve.kind != CurveKind::cumulative_hazard) {
    throw DomainError("smoothing needs a cumulative hazard curve");
  }
  return smoothed_hazard(curve.estimate, bandwidth, kernel, grid);
}

QuantileEstimate survival_quantile(const CurveEstimate& curve, double p, double conf_level,
                                   Transform transform) {
  if (curve.kind != CurveKind::survival) throw DomainError("quantiles need a survival curve");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  const auto times = curve.estimate.jump_times();
  const auto values = curve.estimate.values();
  QuantileEstimate q;
  q.p = p;
  auto hit = std::find_if(values.begin(), values.end(), [&](double s) { return 1.0 - s >= p; });
  if (hit == values.end()) {
    throw QuantileUndefinedError("survival estimate never falls to 1 - p");
  }
  q.quantile = times[static_cast<std::size_t>(hit - values.begin())];

  const double z = normal_critical(conf_level);
  const double target = 1.0 - p;
  auto g = [&](double s) {
    switch (transform) {
      case Transform::linear:
        return s;
      case Transform::loglog:
        return std::log(-std::log(s));
      case Transform::arcsin_sqrt:
        return std::asin(std::sqrt(s));
    }
    return s;
  };
  // delta-method SE of g(Ŝ) with Ŝ·σ̂ the SE of Ŝ
  auto g_se = [&](double s, double sigma) {
    switch (transform) {
      case Transform::linear:
        return s * sigma;
      case Transform::loglog:
        return sigma / std::abs(std::log(s));
      case Transform::arcsin_sqrt:
        return 0.5 * sigma * std::sqrt(s / (1.0 - s));
    }
    return s * sigma;
  };
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double s = values[k];
    const double s2 = curve.sigma2.value(times[k]);
    if (transform != Transform::linear && (s <= 0.0 || s >= 1.0)) continue;
    if (std::isinf(s2)) continue;
    const double se = g_se(s, std::sqrt(s2));
    const double gap = std::abs(g(s) - g(target));
    if (gap <= z * se) q.inversion.push_back(times[k]);
  }
  if (!q.inversion.empty()) q.ci = Interval{q.inversion.front(), q.inversion.back()};
  return q;
}

}  // namespace hazardforge
