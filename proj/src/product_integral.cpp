#include "hazardforge/product_integral.hpp"

#include <algorithm>
#include <cmath>

#include "hazardforge/errors.hpp"

namespace hazardforge {

MatrixStepFunction::MatrixStepFunction(std::vector<double> times,
                                       std::vector<Eigen::MatrixXd> increments)
    : dim_(increments.empty() ? 0 : increments.front().rows()),
      times_(std::move(times)),
      increments_(std::move(increments)) {
  if (times_.size() != increments_.size()) {
    throw ValidationError("matrix step function needs one increment per jump time");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw ValidationError("matrix step function jump times must increase");
    }
    const auto& m = increments_[i];
    if (m.rows() != dim_ || m.cols() != dim_) {
      throw DomainError("matrix step function increments must share one square dimension");
    }
    if (!m.allFinite()) throw ValidationError("matrix step function increments must be finite");
  }
}

Eigen::MatrixXd MatrixStepFunction::value(double t) const {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim_, dim_);
  for (std::size_t i = 0; i < times_.size() && times_[i] <= t; ++i) sum += increments_[i];
  return sum;
}

double product_integral(const StepFunction& hazard, double t) {
  double prod = 1.0;
  const auto times = hazard.jump_times();
  const auto jumps = hazard.jump_sizes();
  for (std::size_t i = 0; i < times.size() && times[i] <= t; ++i) prod *= 1.0 - jumps[i];
  return prod;
}

double product_integral(const StepFunction& discrete,
                        const std::function<double(double)>& continuous, double t) {
  return product_integral(discrete, t) * std::exp(-continuous(t));
}

StepFunction product_integral_curve(const StepFunction& hazard) {
  const auto times = hazard.jump_times();
  const auto jumps = hazard.jump_sizes();
  std::vector<double> values(times.size());
  double prod = 1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    prod *= 1.0 - jumps[i];
    values[i] = prod;
  }
  return StepFunction::from_values({times.begin(), times.end()}, std::move(values), 1.0);
}

Eigen::MatrixXd product_integral(const MatrixStepFunction& hazard, double s, double t) {
  if (s > t) throw DomainError("product integral needs s <= t");
  const auto& times = hazard.jump_times();
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(hazard.dim(), hazard.dim());
  auto it = std::upper_bound(times.begin(), times.end(), s);
  for (; it != times.end() && *it <= t; ++it) {
    const auto k = static_cast<std::size_t>(it - times.begin());
    prod = prod * (Eigen::MatrixXd::Identity(hazard.dim(), hazard.dim()) + hazard.increments()[k]);
  }
  return prod;
}

}  // namespace hazardforge
