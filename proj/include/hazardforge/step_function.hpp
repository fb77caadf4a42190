#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hazardforge {

/// Right-continuous piecewise-constant function on [0, inf).
///
/// Both the jump sizes and the cumulative values are kept so that callers
/// which build a curve from increments (Nelson-Aalen) and callers which build
/// it from levels (Kaplan-Meier) each get back exactly what they stored.
/// Zero-size jumps are never stored.
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(double initial_value) : initial_(initial_value) {}

  /// Jumps at strictly increasing nonnegative times.
  static StepFunction from_jumps(std::vector<double> times, std::vector<double> jumps,
                                 double initial_value = 0.0);
  /// Levels reached at strictly increasing nonnegative times.
  static StepFunction from_values(std::vector<double> times, std::vector<double> values,
                                  double initial_value = 0.0);

  double operator()(double t) const { return value(t); }
  double value(double t) const;
  double left_limit(double t) const;
  double jump_at(double t) const;

  double initial_value() const noexcept { return initial_; }
  double final_value() const noexcept { return values_.empty() ? initial_ : values_.back(); }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  std::span<const double> jump_times() const noexcept { return times_; }
  std::span<const double> jump_sizes() const noexcept { return jumps_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Index of the last jump at or before t, or -1.
  std::ptrdiff_t index_at(double t) const;

  /// Pointwise linear map a*f + b (jumps scale by a).
  StepFunction affine(double a, double b = 0.0) const;

 private:
  std::vector<double> times_;
  std::vector<double> jumps_;
  std::vector<double> values_;
  double initial_ = 0.0;
};

/// Sum of two step functions on the union of their jump grids.
StepFunction operator+(const StepFunction& a, const StepFunction& b);
StepFunction operator-(const StepFunction& a, const StepFunction& b);

}  // namespace hazardforge
