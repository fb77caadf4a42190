#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hazardforge/nonparam.hpp"
#include "hazardforge/samples.hpp"

namespace hazardforge {

/// Ŝ(s, t) on the grid {0} ∪ distinct event coordinates of each margin.
/// surface(i, j) is the value at (grid_s[i], grid_t[j]); the estimate is
/// constant between grid points.
struct BivariateSurfaceEstimate {
  std::vector<double> grid_s;
  std::vector<double> grid_t;
  Eigen::MatrixXd surface;
  CurveEstimate marginal_s;
  CurveEstimate marginal_t;

  double value(double s, double t) const;
};

BivariateSurfaceEstimate dabrowska(const BivariateSample& sample);

}  // namespace hazardforge
