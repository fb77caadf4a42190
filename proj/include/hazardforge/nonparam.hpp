#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hazardforge/kernels.hpp"
#include "hazardforge/samples.hpp"
#include "hazardforge/step_function.hpp"

namespace hazardforge {

enum class CurveKind { cumulative_hazard, survival };

/// A right-censored curve estimate.
///
/// For the cumulative-hazard kind `variance` is the NA variance and equals
/// `sigma2`. For the survival kind `sigma2` is Greenwood's relative variance
/// and `variance` is Ŝ²σ̂² (zero once Ŝ has reached 0).
struct CurveEstimate {
  CurveKind kind = CurveKind::cumulative_hazard;
  StepFunction estimate;
  StepFunction variance;
  StepFunction sigma2;
  std::size_t n = 0;
  double max_time = 0.0;                  // largest observed time; Y > 0 on [0, max_time]
  std::optional<double> saturation_time;  // KM: first time with Y == ΔN
};

CurveEstimate nelson_aalen(const RightCensoredSample& sample);
CurveEstimate kaplan_meier(const RightCensoredSample& sample);
/// NA or KM from raw arrays (used for residual samples and subgroups).
CurveEstimate nelson_aalen(std::span<const double> times, std::span<const int> status);
CurveEstimate kaplan_meier(std::span<const double> times, std::span<const int> status);

/// ∫_0^t P̂(Y(s) = 0) α0(s) ds with P̂ the fraction of replicate samples whose
/// risk set is empty at s.
double na_bias_bound(std::span<const RightCensoredSample> replicates,
                     const std::function<double(double)>& alpha0, double t);

enum class Transform { linear, loglog, arcsin_sqrt };

struct Interval {
  double lo;
  double hi;
};

/// Pointwise interval at time t.
Interval pointwise_ci(const CurveEstimate& curve, double t, double conf_level,
                      Transform transform = Transform::linear);
/// Same, from an estimate and its standard error on the relative scale
/// (survival: SE(Ŝ) = Ŝσ̂; hazard: SE(Â) = σ̂).
Interval pointwise_ci(CurveKind kind, double estimate, double sigma, double conf_level,
                      Transform transform);

/// α̂(t) = b⁻¹ Σ K((t − s)/b) ΔA(s) on `grid`.
std::vector<double> smoothed_hazard(const StepFunction& cumulative, double bandwidth,
                                    Kernel kernel, std::span<const double> grid);
std::vector<double> smoothed_hazard(const CurveEstimate& curve, double bandwidth, Kernel kernel,
                                    std::span<const double> grid);

struct QuantileEstimate {
  double p = 0.0;
  double quantile = 0.0;
  std::optional<Interval> ci;     // hull of the inversion set
  std::vector<double> inversion;  // jump times in the inversion set
};

QuantileEstimate survival_quantile(const CurveEstimate& curve, double p, double conf_level,
                                   Transform transform = Transform::linear);

}  // namespace hazardforge
