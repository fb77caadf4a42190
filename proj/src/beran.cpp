#include <algorithm>
#include <cmath>
#include <numeric>

#include "hazardforge/errors.hpp"
#include "hazardforge/product_integral.hpp"
#include "hazardforge/regress.hpp"

namespace hazardforge {

BeranEstimate beran_conditional(const RightCensoredSample& sample, double z0, double bandwidth,
                                Kernel kernel, Eigen::Index column) {
  if (!(bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
  if (column < 0 || column >= sample.dim()) throw DomainError("covariate column out of range");
  const auto n = sample.size();
  std::vector<double> w(n);
  double total = 0.0;
  double last = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = kernel_weight(kernel,
                         (sample.covariates()(static_cast<Eigen::Index>(i), column) - z0) / bandwidth);
    total += w[i];
    if (w[i] > 0.0) last = std::max(last, sample.time(i));
  }
  if (!(total > 0.0)) throw EmptyNeighborhoodError("no records carry kernel weight at z0");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sample.time(a) < sample.time(b); });
  std::vector<double> times;
  std::vector<double> dA;
  std::vector<double> dV;
  double at_risk = total;  // Σ W_l Y_l(t)
  std::size_t k = 0;
  while (k < n) {
    const double t = sample.time(order[k]);
    double events = 0.0;
    double events_sq = 0.0;
    double leaving = 0.0;
    for (; k < n && sample.time(order[k]) == t; ++k) {
      const double wi = w[order[k]];
      if (sample.event(order[k])) {
        events += wi;
        events_sq += wi * wi;
      }
      leaving += wi;
    }
    if (events > 0.0 && at_risk > 0.0) {
      times.push_back(t);
      dA.push_back(events / at_risk);
      dV.push_back(events_sq / (at_risk * at_risk));
    }
    at_risk -= leaving;
  }
  BeranEstimate out;
  out.hazard.kind = CurveKind::cumulative_hazard;
  out.hazard.estimate = StepFunction::from_jumps(times, std::move(dA));
  out.hazard.variance = StepFunction::from_jumps(std::move(times), std::move(dV));
  out.hazard.sigma2 = out.hazard.variance;
  out.hazard.n = n;
  out.hazard.max_time = last;
  out.survival = product_integral_curve(out.hazard.estimate);
  return out;
}

}  // namespace hazardforge
