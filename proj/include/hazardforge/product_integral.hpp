#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hazardforge/step_function.hpp"

namespace hazardforge {

/// Matrix-valued step function stored as increments at ordered jump times.
class MatrixStepFunction {
 public:
  explicit MatrixStepFunction(Eigen::Index dim) : dim_(dim) {}
  MatrixStepFunction(std::vector<double> times, std::vector<Eigen::MatrixXd> increments);

  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return times_.size(); }
  const std::vector<double>& jump_times() const noexcept { return times_; }
  const std::vector<Eigen::MatrixXd>& increments() const noexcept { return increments_; }

  /// Sum of increments at times <= t.
  Eigen::MatrixXd value(double t) const;

 private:
  Eigen::Index dim_;
  std::vector<double> times_;
  std::vector<Eigen::MatrixXd> increments_;
};

/// prod_{s <= t} (1 - dA(s)) for a purely discrete A.
double product_integral(const StepFunction& hazard, double t);

/// Cox's split: prod over the jumps of the discrete part times
/// exp(-continuous(t)).
double product_integral(const StepFunction& discrete, const std::function<double(double)>& continuous,
                        double t);

/// The whole curve t -> prod_{s <= t}(1 - dA(s)) on A's jump grid.
StepFunction product_integral_curve(const StepFunction& hazard);

/// Ordered product of (I + dA(u)) over jumps u in (s, t], left to right.
Eigen::MatrixXd product_integral(const MatrixStepFunction& hazard, double s, double t);

}  // namespace hazardforge
