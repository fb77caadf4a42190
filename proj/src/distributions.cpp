#include "hazardforge/distributions.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "hazardforge/errors.hpp"

namespace hazardforge {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double normal_critical(double conf_level) {
  if (!(conf_level > 0.0 && conf_level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1)");
  }
  return normal_quantile(0.5 + 0.5 * conf_level);
}

double chi2_sf(double x, double df) {
  if (!(df > 0.0)) throw DomainError("chi-square degrees of freedom must be positive");
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace hazardforge
