#include <algorithm>
#include <cmath>
#include <numeric>

#include "hazardforge/errors.hpp"
#include "hazardforge/regress.hpp"

namespace hazardforge {

Eigen::MatrixXd AdditiveFit::covariance(double t) const {
  const auto p = static_cast<Eigen::Index>(coefficients.size());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t k = 0; k < times.size() && times[k] <= t; ++k) sum += covariance_increments[k];
  return sum;
}

AdditiveFit aalen_additive(const RightCensoredSample& sample) {
  const auto p = sample.dim();
  const auto cols = p + 1;
  if (static_cast<Eigen::Index>(sample.size()) <= cols) {
    throw ValidationError("additive model needs more records than coefficients");
  }
  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sample.time(a) < sample.time(b); });

  AdditiveFit fit;
  std::vector<std::vector<double>> jumps(static_cast<std::size_t>(cols));
  std::size_t start = 0;  // first record still at risk
  while (start < order.size()) {
    const double t = sample.time(order[start]);
    std::size_t stop = start;
    bool any_event = false;
    for (; stop < order.size() && sample.time(order[stop]) == t; ++stop) {
      any_event = any_event || sample.event(order[stop]);
    }
    if (any_event) {
      // design rows (1, Z_i) of the risk set {time_i >= t}
      const auto r = static_cast<Eigen::Index>(order.size() - start);
      Eigen::MatrixXd x(r, cols);
      Eigen::VectorXd dn = Eigen::VectorXd::Zero(r);
      for (Eigen::Index row = 0; row < r; ++row) {
        const auto i = order[start + static_cast<std::size_t>(row)];
        x(row, 0) = 1.0;
        x.row(row).tail(p) = sample.covariates().row(static_cast<Eigen::Index>(i));
        if (sample.time(i) == t && sample.event(i)) dn[row] = 1.0;
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
      qr.setThreshold(1e-10);
      if (qr.rank() == cols) {
        // columns of Y⁻ = (XᵀX)⁻¹Xᵀ for the event rows; the others multiply ΔN = 0
        std::vector<Eigen::Index> event_rows;
        for (Eigen::Index row = 0; row < r; ++row) {
          if (dn[row] != 0.0) event_rows.push_back(row);
        }
        Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(r, static_cast<Eigen::Index>(event_rows.size()));
        for (std::size_t e = 0; e < event_rows.size(); ++e) {
          unit(event_rows[e], static_cast<Eigen::Index>(e)) = 1.0;
        }
        const Eigen::MatrixXd ginv = qr.solve(unit);
        const Eigen::VectorXd db = ginv.rowwise().sum();
        const Eigen::MatrixXd cov = ginv * ginv.transpose();
        fit.times.push_back(t);
        fit.covariance_increments.push_back(std::move(cov));
        for (Eigen::Index j = 0; j < cols; ++j) jumps[static_cast<std::size_t>(j)].push_back(db[j]);
      } else {
        fit.skipped_times.push_back(t);
      }
    }
    start = stop;
  }
  for (auto& j : jumps) fit.coefficients.push_back(StepFunction::from_jumps(fit.times, std::move(j)));
  return fit;
}

std::vector<std::vector<double>> aalen_smoothed_coefficients(const AdditiveFit& fit,
                                                             double bandwidth, Kernel kernel,
                                                             std::span<const double> grid) {
  std::vector<std::vector<double>> out;
  for (const auto& b : fit.coefficients) out.push_back(smoothed_hazard(b, bandwidth, kernel, grid));
  return out;
}

}  // namespace hazardforge
