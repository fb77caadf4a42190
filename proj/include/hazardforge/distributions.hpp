#pragma once

namespace hazardforge {

double normal_cdf(double x);
/// Inverse of the standard normal CDF on (0, 1).
double normal_quantile(double p);
/// Upper two-sided critical value z_{(1+conf)/2}.
double normal_critical(double conf_level);
/// P(chi2_df > x) via the regularized upper incomplete gamma function.
double chi2_sf(double x, double df);

}  // namespace hazardforge
