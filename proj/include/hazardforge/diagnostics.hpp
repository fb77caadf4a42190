#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hazardforge/nonparam.hpp"
#include "hazardforge/regress.hpp"
#include "hazardforge/samples.hpp"

namespace hazardforge {

struct ResidualSet {
  Eigen::VectorXd martingale;  // M̂_i(∞) = D_i − exp(β̂ᵀZ_i) Â0(T_i)
  Eigen::VectorXd deviance;
  Eigen::VectorXd cox_snell;   // r̂_i = exp(β̂ᵀZ_i) Â0(T_i)
  Eigen::VectorXi status;
};

ResidualSet martingale_residuals(const CoxFit& fit, const RightCensoredSample& sample);

/// sign(M)·sqrt(−2(M + D log(D − M))), 0·log 0 = 0.
double deviance_residual(double martingale, int status);
Eigen::VectorXd deviance_residuals(const ResidualSet& residuals);

struct CoxSnellPlot {
  Eigen::VectorXd residuals;
  Eigen::VectorXi status;
  CurveEstimate hazard;  // NA of the (r̂_i, D_i) sample
  double percentile90 = 0.0;
  double slope = 0.0;  // NA(q90)/q90; near 1 for a well-specified model
};

CoxSnellPlot cox_snell(const CoxFit& fit, const RightCensoredSample& sample);

struct ArjasSeries {
  int stratum = 0;
  std::vector<double> times;     // ordered event times in the stratum
  std::vector<double> observed;  // m = 1, 2, ...
  std::vector<double> expected;  // Σ_{i in stratum} exp(β̂ᵀZ_i) Â0(min(T_i, t_m))
};

/// One series per stratum label (sorted); strata without events give empty
/// series.
std::vector<ArjasSeries> arjas_plot_data(const CoxFit& fit, const RightCensoredSample& sample,
                                         const std::vector<int>& strata);

struct AndersenPlot {
  int reference = 0;  // stratum on the x axis
  int other = 1;
  std::vector<double> times;
  std::vector<double> reference_hazard;
  std::vector<double> other_hazard;
  std::vector<double> log_reference;
  std::vector<double> log_other;
  double slope = 0.0;  // least squares through the origin of other on reference
};

/// Separate Cox fits per stratum on the sample's covariates, baselines
/// compared at pooled event times where both strata keep at least
/// `min_at_risk` subjects at risk.
AndersenPlot andersen_plot_data(const RightCensoredSample& sample, const std::vector<int>& strata,
                                std::size_t min_at_risk = 10);

}  // namespace hazardforge
