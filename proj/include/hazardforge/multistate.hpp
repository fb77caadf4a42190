#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hazardforge/product_integral.hpp"
#include "hazardforge/samples.hpp"

namespace hazardforge {

/// Aalen-Johansen fit. `hazard` holds the increments dÂ at each distinct
/// transition time (off-diagonal ΔN_hj/Y_h, diagonal minus the row sum).
/// The per-time risk vectors and transition counts are kept for the
/// covariance and the complete-observation identity.
struct TransitionEstimate {
  int states = 0;
  MatrixStepFunction hazard{0};
  std::vector<Eigen::VectorXd> at_risk;  // Y_h(u) at each jump time
  std::vector<Eigen::MatrixXd> counts;   // ΔN_hj(u)
  Eigen::VectorXd initial_occupancy;     // Y(0+) before any transition

  /// P̂(s, t) as the ordered product over jumps in (s, t].
  Eigen::MatrixXd transition(double s, double t) const;
  /// Â(t) with the diagonal convention above.
  Eigen::MatrixXd cumulative(double t) const { return hazard.value(t); }
};

TransitionEstimate aalen_johansen(const MultiStateHistory& history);

struct CompleteObservationCheck {
  bool pass = false;
  double max_deviation = 0.0;  // max |Y(t+) - Y(s+)P̂(s,t)| / n
};

/// Checks Y(t+) = Y(s+) P̂(s, t) over all pairs of jump times (s = 0
/// included). `estimate` defaults to the AJ fit of `history`; passing a
/// perturbed estimate gives the negative control.
CompleteObservationCheck aj_complete_observation_check(const MultiStateHistory& history,
                                                       double tolerance = 1e-10);
CompleteObservationCheck aj_complete_observation_check(const MultiStateHistory& history,
                                                       const TransitionEstimate& estimate,
                                                       double tolerance = 1e-10);

/// Plug-in covariance of vec(P̂(s, t)) (column-major vec), k² × k².
Eigen::MatrixXd aj_covariance(const TransitionEstimate& estimate, double s, double t);

struct CIFEstimate {
  std::vector<int> causes;
  StepFunction overall_survival;    // all-cause KM, P̂_00
  std::vector<StepFunction> incidence;  // F̂_j per cause, same order as `causes`
};

CIFEstimate competing_risks_cif(const RightCensoredSample& sample);

/// Γ̂(t) = Â(t) − ∫_0^t Y^μ(s)/Y(s) ds, with the integral accumulated by the
/// trapezoid rule on a grid refined at every observed time (Y is constant
/// between observed times).
struct ExcessMortality {
  StepFunction discrete;           // Â
  std::vector<double> grid;        // quadrature nodes, increasing from 0
  std::vector<double> expected;    // ∫_0^grid[k] Y^μ/Y ds
  double gamma(double t) const;    // Γ̂(t), linear between nodes for the integral
  double corrected_survival(double t) const;  // ∏(1 − dÂ) · exp(∫ Y^μ/Y)

 private:
  double integral(double t) const;
};

using PopulationHazard = std::function<double(double)>;

ExcessMortality excess_mortality(const RightCensoredSample& sample,
                                 const std::vector<PopulationHazard>& mu, double step);

}  // namespace hazardforge
