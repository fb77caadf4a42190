#include <algorithm>
#include <cmath>
#include <numeric>

#include "hazardforge/errors.hpp"
#include "hazardforge/regress.hpp"

namespace hazardforge {
namespace {

// V*_i = fitted_i + E(ε | ε > r_i) from the KM of the residuals, for censored
// records; events keep V_i. The largest residual counts as an event so the
// residual distribution has all its mass.
Eigen::VectorXd synthetic_responses(const Eigen::VectorXd& v, const Eigen::VectorXd& fitted,
                                    const Eigen::VectorXi& status) {
  const auto n = v.size();
  const Eigen::VectorXd resid = v - fitted;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return resid[a] < resid[b]; });
  Eigen::VectorXi d = status;
  d[order.back()] = 1;

  // KM masses at the distinct event residuals
  std::vector<double> at;
  std::vector<double> mass;
  double surv = 1.0;
  double remaining = static_cast<double>(n);
  std::size_t k = 0;
  while (k < order.size()) {
    const double u = resid[order[k]];
    double events = 0.0;
    double leaving = 0.0;
    for (; k < order.size() && resid[order[k]] == u; ++k) {
      events += d[order[k]];
      leaving += 1.0;
    }
    if (events > 0.0) {
      const double next = surv * (1.0 - events / remaining);
      at.push_back(u);
      mass.push_back(surv - next);
      surv = next;
    }
    remaining -= leaving;
  }
  // suffix sums of mass and first moment
  std::vector<double> tail_mass(at.size() + 1, 0.0);
  std::vector<double> tail_moment(at.size() + 1, 0.0);
  for (std::size_t j = at.size(); j-- > 0;) {
    tail_mass[j] = tail_mass[j + 1] + mass[j];
    tail_moment[j] = tail_moment[j + 1] + mass[j] * at[j];
  }
  Eigen::VectorXd out = v;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (status[i] == 1) continue;
    const auto j = static_cast<std::size_t>(std::upper_bound(at.begin(), at.end(), resid[i]) -
                                            at.begin());
    if (tail_mass[j] > 0.0) out[i] = fitted[i] + tail_moment[j] / tail_mass[j];
  }
  return out;
}

}  // namespace

BJFit buckley_james(const RightCensoredSample& sample, const BuckleyJamesOptions& options) {
  const auto n = static_cast<Eigen::Index>(sample.size());
  const auto p = sample.dim();
  const auto events = static_cast<Eigen::Index>(sample.event_count());
  if (events == 0) throw DomainError("Buckley-James needs uncensored observations");
  if (events < p + 2) throw ValidationError("Buckley-James needs at least d + 2 uncensored records");
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw DomainError("damping must lie in (0, 1]");
  }
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = sample.time(static_cast<std::size_t>(i));
    if (!(t > 0.0)) throw DomainError("Buckley-James works on log times; times must be positive");
    v[i] = std::log(t);
  }
  Eigen::MatrixXd x(n, p + 1);
  x.col(0).setOnes();
  x.rightCols(p) = sample.covariates();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1) throw RankError("design matrix is rank deficient");

  BJFit fit;
  fit.beta = qr.solve(v);
  fit.synthetic = v;
  std::vector<Eigen::VectorXd> history{fit.beta};
  while (fit.iterations < options.max_iter) {
    const Eigen::VectorXd vstar = synthetic_responses(v, x * fit.beta, sample.status());
    const Eigen::VectorXd ols = qr.solve(vstar);
    const Eigen::VectorXd next = fit.beta + options.damping * (ols - fit.beta);
    const double change = (next - fit.beta).cwiseAbs().maxCoeff();
    fit.beta = next;
    fit.synthetic = vstar;
    ++fit.iterations;
    history.push_back(fit.beta);
    if (change < options.tol) {
      fit.converged = true;
      break;
    }
    // a revisited iterate means the fixed-point map is cycling
    const std::size_t last = history.size() - 1;
    for (std::size_t period = 2; period <= 4 && period <= last; ++period) {
      if ((history[last] - history[last - period]).cwiseAbs().maxCoeff() < options.tol) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(fit.beta.size());
        for (std::size_t j = 0; j < period; ++j) mean += history[last - j];
        fit.beta = mean / static_cast<double>(period);
        fit.cycled = true;
        return fit;
      }
    }
  }
  return fit;
}

}  // namespace hazardforge
