#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hazardforge/samples.hpp"

namespace hazardforge {

/// A point of the Turnbull grid. `before` marks the left limit x− used to
/// give an exact observation x the one-point interval (x−, x].
struct GridPoint {
  double value = 0.0;
  bool before = false;

  friend bool operator<(const GridPoint& a, const GridPoint& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.before && !b.before;
  }
  friend bool operator==(const GridPoint& a, const GridPoint& b) {
    return a.value == b.value && a.before == b.before;
  }
  friend bool operator<=(const GridPoint& a, const GridPoint& b) { return !(b < a); }
};

/// Column j is the cell (grid[j], grid[j+1]]. alpha(i, j) = 1 when the cell
/// lies inside record i's interval. Masses live on the `support` columns.
struct TurnbullProblem {
  std::vector<GridPoint> grid;
  Eigen::MatrixXd alpha;             // n × (grid.size() - 1)
  std::vector<std::size_t> support;  // Turnbull intervals, increasing

  std::size_t n() const noexcept { return static_cast<std::size_t>(alpha.rows()); }
  std::size_t m() const noexcept { return support.size(); }
  /// alpha restricted to the support columns.
  Eigen::MatrixXd support_alpha() const;
  GridPoint left(std::size_t s) const { return grid[support[s]]; }
  GridPoint right(std::size_t s) const { return grid[support[s] + 1]; }
};

TurnbullProblem turnbull_intervals(const IntervalCensoredSample& sample);

struct TurnbullCertificate {
  Eigen::VectorXd d;  // d_j(p) per support interval
  double max_d = 0.0;
  bool is_npmle = false;
};

struct TurnbullSolution {
  Eigen::VectorXd p;  // masses on the support intervals
  double loglik = 0.0;
  std::size_t iterations = 0;    // self-consistency steps
  std::size_t newton_steps = 0;  // polishing steps on the current support
  bool converged = false;
  bool monotone = true;  // log-likelihood never fell by more than the slack
  std::vector<double> loglik_path;
  TurnbullCertificate certificate;
};

double turnbull_loglik(const TurnbullProblem& problem, const Eigen::VectorXd& p);

TurnbullSolution turnbull_em(const TurnbullProblem& problem, double tol = 1e-9,
                             std::size_t max_iter = 100000);

TurnbullCertificate turnbull_certificate(const TurnbullProblem& problem, const Eigen::VectorXd& p);

}  // namespace hazardforge
