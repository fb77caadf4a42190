#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hazardforge/samples.hpp"

namespace hazardforge {

enum class WeightKind { logrank, wilcoxon, fleming_harrington };

/// K(s) per event time. `scale` multiplies every weight (the statistic is
/// invariant to it).
struct WeightSpec {
  WeightKind kind = WeightKind::logrank;
  double rho = 0.0;
  double scale = 1.0;
};

struct TestResult {
  double statistic = 0.0;  // chi-square scale
  std::optional<double> z;
  int df = 1;
  double p_value = 1.0;
  std::vector<int> groups;
  Eigen::VectorXd observed;
  Eigen::VectorXd expected;
  Eigen::VectorXd score;     // Z_h for every group
  Eigen::MatrixXd variance;  // covariance of the Z_h
  std::optional<double> smr;
  std::vector<std::string> warnings;
};

using CumulativeHazard = std::function<double(double)>;

/// Z(t) = ∫K d(Â − A0), ⟨Z⟩(t) = ∫K²/Y dA0, statistic Z²/⟨Z⟩. A0 must be
/// continuous and nondecreasing; integrals over the steps of Y are exact.
TestResult one_sample_logrank(const RightCensoredSample& sample, const CumulativeHazard& a0,
                              double t, const WeightSpec& weight = {});

/// Weighted k-sample test on events up to t; uses the group labels.
TestResult k_sample_logrank(const RightCensoredSample& sample, const WeightSpec& weight = {},
                            double t = kInf);

/// Two-sample test summed over the strata labels: (Σ Z_1s)² / Σ σ̂²_11s.
TestResult stratified_logrank(const RightCensoredSample& sample, const WeightSpec& weight = {},
                              double t = kInf);

}  // namespace hazardforge
