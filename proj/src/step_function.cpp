#include "hazardforge/step_function.hpp"

#include <algorithm>
#include <cmath>

#include "hazardforge/errors.hpp"

namespace hazardforge {
namespace {

void check_times(const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i])) {
      throw ValidationError("step function jump times must be finite and nonnegative");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ValidationError("step function jump times must be strictly increasing");
    }
  }
}

}  // namespace

StepFunction StepFunction::from_jumps(std::vector<double> times, std::vector<double> jumps,
                                      double initial_value) {
  if (times.size() != jumps.size()) {
    throw ValidationError("step function needs one jump size per jump time");
  }
  check_times(times);
  StepFunction f(initial_value);
  f.times_.reserve(times.size());
  f.jumps_.reserve(times.size());
  f.values_.reserve(times.size());
  double level = initial_value;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (jumps[i] == 0.0) continue;
    level += jumps[i];
    f.times_.push_back(times[i]);
    f.jumps_.push_back(jumps[i]);
    f.values_.push_back(level);
  }
  return f;
}

StepFunction StepFunction::from_values(std::vector<double> times, std::vector<double> values,
                                       double initial_value) {
  if (times.size() != values.size()) {
    throw ValidationError("step function needs one value per jump time");
  }
  check_times(times);
  StepFunction f(initial_value);
  double previous = initial_value;
  for (std::size_t i = 0; i < times.size(); ++i) {
    // inf - inf is NaN; a level that stays infinite is not a jump.
    const bool same = values[i] == previous;
    if (same) continue;
    f.times_.push_back(times[i]);
    f.jumps_.push_back(values[i] - previous);
    f.values_.push_back(values[i]);
    previous = values[i];
  }
  return f;
}

std::ptrdiff_t StepFunction::index_at(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::ptrdiff_t>(it - times_.begin()) - 1;
}

double StepFunction::value(double t) const {
  const auto k = index_at(t);
  return k < 0 ? initial_ : values_[static_cast<std::size_t>(k)];
}

double StepFunction::left_limit(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  const auto k = static_cast<std::ptrdiff_t>(it - times_.begin()) - 1;
  return k < 0 ? initial_ : values_[static_cast<std::size_t>(k)];
}

double StepFunction::jump_at(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end() || *it != t) return 0.0;
  return jumps_[static_cast<std::size_t>(it - times_.begin())];
}

StepFunction StepFunction::affine(double a, double b) const {
  StepFunction f(a * initial_ + b);
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double jump = a * jumps_[i];
    if (jump == 0.0) continue;
    f.times_.push_back(times_[i]);
    f.jumps_.push_back(jump);
    f.values_.push_back(a * values_[i] + b);
  }
  return f;
}

namespace {

StepFunction combine(const StepFunction& a, const StepFunction& b, double sign) {
  std::vector<double> times;
  times.reserve(a.size() + b.size());
  std::merge(a.jump_times().begin(), a.jump_times().end(), b.jump_times().begin(),
             b.jump_times().end(), std::back_inserter(times));
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<double> jumps(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    jumps[i] = a.jump_at(times[i]) + sign * b.jump_at(times[i]);
  }
  return StepFunction::from_jumps(std::move(times), std::move(jumps),
                                  a.initial_value() + sign * b.initial_value());
}

}  // namespace

StepFunction operator+(const StepFunction& a, const StepFunction& b) { return combine(a, b, 1.0); }
StepFunction operator-(const StepFunction& a, const StepFunction& b) { return combine(a, b, -1.0); }

}  // namespace hazardforge
