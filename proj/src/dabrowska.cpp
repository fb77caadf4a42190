#include "hazardforge/dabrowska.hpp"

#include <algorithm>
#include <cmath>

#include "hazardforge/errors.hpp"

namespace hazardforge {
namespace {

std::vector<double> event_grid(const std::vector<double>& t, const std::vector<int>& d) {
  std::vector<double> g{0.0};
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (d[i] == 1 && t[i] > 0.0) g.push_back(t[i]);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

std::ptrdiff_t grid_index(const std::vector<double>& g, double x) {
  return static_cast<std::ptrdiff_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin()) - 1;
}

}  // namespace

double BivariateSurfaceEstimate::value(double s, double t) const {
  if (s < 0.0 || t < 0.0) return 1.0;
  const auto i = grid_index(grid_s, s);
  const auto j = grid_index(grid_t, t);
  return surface(i, j);
}

BivariateSurfaceEstimate dabrowska(const BivariateSample& x) {
  BivariateSurfaceEstimate out;
  out.grid_s = event_grid(x.t1, x.d1);
  out.grid_t = event_grid(x.t2, x.d2);
  out.marginal_s = kaplan_meier(x.t1, x.d1);
  out.marginal_t = kaplan_meier(x.t2, x.d2);
  const auto m1 = static_cast<Eigen::Index>(out.grid_s.size());
  const auto m2 = static_cast<Eigen::Index>(out.grid_t.size());
  const std::size_t n = x.size();

  // cell counts: risk set Y(u, v) = #{T1 >= u, T2 >= v} and the three jump
  // counts of the double, first-only and second-only processes
  Eigen::MatrixXd at_risk = Eigen::MatrixXd::Zero(m1, m2);
  Eigen::MatrixXd both = Eigen::MatrixXd::Zero(m1, m2);
  Eigen::MatrixXd first = Eigen::MatrixXd::Zero(m1, m2);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(m1, m2);
  for (std::size_t k = 0; k < n; ++k) {
    // grid cells (i, j) with grid_s[i] <= T1 and grid_t[j] <= T2
    const auto i_max = grid_index(out.grid_s, x.t1[k]);
    const auto j_max = grid_index(out.grid_t, x.t2[k]);
    at_risk.topLeftCorner(i_max + 1, j_max + 1).array() += 1.0;
    const bool on_s = x.d1[k] == 1 && out.grid_s[static_cast<std::size_t>(i_max)] == x.t1[k];
    const bool on_t = x.d2[k] == 1 && out.grid_t[static_cast<std::size_t>(j_max)] == x.t2[k];
    if (on_s) first.block(i_max, 0, 1, j_max + 1).array() += 1.0;
    if (on_t) second.block(0, j_max, i_max + 1, 1).array() += 1.0;
    if (on_s && on_t) both(i_max, j_max) += 1.0;
  }

  // 1 - L̂ = (1 - a - b + c) / ((1 - a)(1 - b)) per interior cell. When a
  // denominator factor is zero the whole quadrant fails on that line, which
  // forces the numerator to zero as well: the conditional joint survival of
  // the quadrant is 0 and the surface vanishes above the cell
  Eigen::MatrixXd factor = Eigen::MatrixXd::Ones(m1, m2);
  for (Eigen::Index i = 1; i < m1; ++i) {
    for (Eigen::Index j = 1; j < m2; ++j) {
      const double y = at_risk(i, j);
      if (y == 0.0) continue;
      const double a = first(i, j) / y;
      const double b = second(i, j) / y;
      const double c = both(i, j) / y;
      const double denom = (1.0 - a) * (1.0 - b);
      if (denom == 0.0) {
        if (1.0 - a - b + c != 0.0) {
          const auto si = static_cast<std::size_t>(i);
          const auto sj = static_cast<std::size_t>(j);
          throw SingularCellError(si, sj, out.grid_s[si], out.grid_t[sj]);
        }
        factor(i, j) = 0.0;
        continue;
      }
      factor(i, j) = 1.0 - (a * b - c) / denom;
    }
  }

  // P(i, j) = ∏_{i' <= i, j' <= j} factor, accumulated by rows
  Eigen::MatrixXd prod = Eigen::MatrixXd::Ones(m1, m2);
  for (Eigen::Index i = 0; i < m1; ++i) {
    double row = 1.0;
    for (Eigen::Index j = 0; j < m2; ++j) {
      row *= factor(i, j);
      prod(i, j) = (i > 0 ? prod(i - 1, j) : 1.0) * row;
    }
  }

  out.surface.resize(m1, m2);
  for (Eigen::Index i = 0; i < m1; ++i) {
    const double ms = out.marginal_s.estimate.value(out.grid_s[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m2; ++j) {
      const double mt = out.marginal_t.estimate.value(out.grid_t[static_cast<std::size_t>(j)]);
      out.surface(i, j) = ms * mt * prod(i, j);
    }
  }
  return out;
}

}  // namespace hazardforge
