#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "hazardforge/kernels.hpp"
#include "hazardforge/logrank.hpp"
#include "hazardforge/nonparam.hpp"
#include "hazardforge/samples.hpp"
#include "hazardforge/step_function.hpp"

namespace hazardforge {

struct CoxOptions {
  double tol = 1e-8;  // on the sup norm of the score
  std::size_t max_iter = 100;
  std::size_t max_halvings = 20;
  double divergence_limit = 50.0;
};

struct CoxFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd information;
  std::vector<double> loglik_path;
  StepFunction breslow;  // Â0(t, β̂)
  bool converged = false;
  double score_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t events = 0;

  double loglik() const { return loglik_path.empty() ? 0.0 : loglik_path.back(); }
  /// sqrt of the diagonal of the inverse information.
  Eigen::VectorXd standard_errors() const;
};

/// Log partial likelihood (Breslow ties), score and information at beta.
struct PartialLikelihood {
  double value = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};
PartialLikelihood cox_partial_likelihood(const RightCensoredSample& sample,
                                         const Eigen::VectorXd& beta);

CoxFit cox_fit(const RightCensoredSample& sample, const CoxOptions& options = {});
TestResult cox_score_test(const RightCensoredSample& sample, const Eigen::VectorXd& beta0);
/// ΔÂ0(t) = ΔN(t)/S0(β, t).
StepFunction breslow_estimator(const RightCensoredSample& sample, const Eigen::VectorXd& beta);
std::vector<double> smoothed_baseline(const CoxFit& fit, double bandwidth, Kernel kernel,
                                      std::span<const double> grid);

struct AdditiveFit {
  std::vector<StepFunction> coefficients;  // B̂_0 (intercept), B̂_1..B̂_p
  std::vector<double> times;               // event times with full rank (J = 1)
  std::vector<Eigen::MatrixXd> covariance_increments;
  std::vector<double> skipped_times;  // event times with J = 0

  /// Σ̂(t): sum of the covariance increments up to t.
  Eigen::MatrixXd covariance(double t) const;
};

AdditiveFit aalen_additive(const RightCensoredSample& sample);
std::vector<std::vector<double>> aalen_smoothed_coefficients(const AdditiveFit& fit,
                                                             double bandwidth, Kernel kernel,
                                                             std::span<const double> grid);

struct BuckleyJamesOptions {
  double tol = 1e-8;
  std::size_t max_iter = 200;
  double damping = 1.0;  // β ← β + damping (β_OLS − β)
};

struct BJFit {
  Eigen::VectorXd beta;  // intercept first
  std::size_t iterations = 0;
  bool converged = false;
  bool cycled = false;
  Eigen::VectorXd synthetic;  // V* that produced beta
};

BJFit buckley_james(const RightCensoredSample& sample, const BuckleyJamesOptions& options = {});

struct BeranEstimate {
  CurveEstimate hazard;  // cumulative hazard given z0
  StepFunction survival;
};

/// Kernel-weighted NA at covariate value z0, using covariate column `column`.
BeranEstimate beran_conditional(const RightCensoredSample& sample, double z0, double bandwidth,
                                Kernel kernel, Eigen::Index column = 0);

enum class ParametricFamily { exponential, weibull };

struct ParametricOptions {
  double tol = 1e-10;
  std::size_t max_iter = 200;
  std::optional<double> fixed_shape;  // Weibull only
};

/// Exponential: theta = (rate). Weibull: theta = (shape, scale) with
/// hazard (k/σ)(t/σ)^{k−1}. The information is the observed information of
/// the log-parameters.
struct ParametricFit {
  ParametricFamily family = ParametricFamily::exponential;
  Eigen::VectorXd theta;
  Eigen::MatrixXd information;
  double loglik = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

ParametricFit parametric_fit(const RightCensoredSample& sample, ParametricFamily family,
                             const ParametricOptions& options = {});

}  // namespace hazardforge
