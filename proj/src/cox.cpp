#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hazardforge/distributions.hpp"
#include "hazardforge/errors.hpp"
#include "hazardforge/regress.hpp"

namespace hazardforge {
namespace {

std::vector<std::size_t> descending_time_order(const RightCensoredSample& s) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.time(a) > s.time(b); });
  return order;
}

void check_cox_input(const RightCensoredSample& sample) {
  if (sample.event_count() == 0) throw DomainError("Cox fit needs at least one event");
}

Eigen::MatrixXd inverse_information(const Eigen::MatrixXd& info) {
  if (info.size() == 0) return info;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (!(ev.minCoeff() > 1e-12 * std::max(top, 1e-300))) {
    throw RankError("information matrix is singular");
  }
  return eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

PartialLikelihood cox_partial_likelihood(const RightCensoredSample& sample,
                                         const Eigen::VectorXd& beta) {
  const auto d = sample.dim();
  if (beta.size() != d) throw DomainError("coefficient vector does not match covariates");
  // centering leaves the partial likelihood unchanged and keeps exp() tame
  const Eigen::RowVectorXd mean = sample.covariates().colwise().mean();
  const Eigen::MatrixXd z = sample.covariates().rowwise() - mean;
  const Eigen::VectorXd eta = z * beta;
  const double shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;
  const auto order = descending_time_order(sample);

  PartialLikelihood pl;
  pl.score = Eigen::VectorXd::Zero(d);
  pl.information = Eigen::MatrixXd::Zero(d, d);
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(d, d);
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double t = sample.time(order[pos]);
    double events = 0.0;
    Eigen::VectorXd z_events = Eigen::VectorXd::Zero(d);
    double eta_events = 0.0;
    for (; pos < order.size() && sample.time(order[pos]) == t; ++pos) {
      const auto i = static_cast<Eigen::Index>(order[pos]);
      const double w = std::exp(eta[i] - shift);
      s0 += w;
      s1 += w * z.row(i).transpose();
      s2 += w * z.row(i).transpose() * z.row(i);
      if (sample.event(order[pos])) {
        events += 1.0;
        z_events += z.row(i).transpose();
        eta_events += eta[i];
      }
    }
    if (events == 0.0) continue;
    const Eigen::VectorXd e = s1 / s0;
    pl.value += eta_events - events * (std::log(s0) + shift);
    pl.score += z_events - events * e;
    pl.information += events * (s2 / s0 - e * e.transpose());
  }
  return pl;
}

StepFunction breslow_estimator(const RightCensoredSample& sample, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd risk = (sample.covariates() * beta).array().exp();
  const auto order = descending_time_order(sample);
  std::vector<double> times;
  std::vector<double> jumps;
  double s0 = 0.0;
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double t = sample.time(order[pos]);
    double events = 0.0;
    for (; pos < order.size() && sample.time(order[pos]) == t; ++pos) {
      s0 += risk[static_cast<Eigen::Index>(order[pos])];
      if (sample.event(order[pos])) events += 1.0;
    }
    if (events > 0.0) {
      times.push_back(t);
      jumps.push_back(events / s0);
    }
  }
  std::reverse(times.begin(), times.end());
  std::reverse(jumps.begin(), jumps.end());
  return StepFunction::from_jumps(std::move(times), std::move(jumps));
}

Eigen::VectorXd CoxFit::standard_errors() const {
  return inverse_information(information).diagonal().cwiseSqrt();
}

CoxFit cox_fit(const RightCensoredSample& sample, const CoxOptions& options) {
  check_cox_input(sample);
  const auto d = sample.dim();
  CoxFit fit;
  fit.events = sample.event_count();
  fit.beta = Eigen::VectorXd::Zero(d);
  auto pl = cox_partial_likelihood(sample, fit.beta);
  fit.loglik_path.push_back(pl.value);
  if (d == 0) {
    fit.converged = true;
    fit.information = pl.information;
    fit.breslow = breslow_estimator(sample, fit.beta);
    return fit;
  }
  while (true) {
    fit.score_norm = pl.score.cwiseAbs().maxCoeff();
    const Eigen::VectorXd step = inverse_information(pl.information) * pl.score;
    if (fit.score_norm < options.tol) {
      // a flat score with a Newton step still of order one means the
      // information vanished along a direction of ever-increasing likelihood
      for (Eigen::Index j = 0; j < d; ++j) {
        if (std::abs(step[j]) > 1e-3 * std::max(1.0, std::abs(fit.beta[j]))) {
          throw MonotoneLikelihoodError("coefficient " + std::to_string(j + 1) +
                                        " diverges (monotone likelihood)");
        }
      }
      fit.converged = true;
      break;
    }
    if (fit.iterations >= options.max_iter) break;
    double scale = 1.0;
    Eigen::VectorXd next = fit.beta + step;
    auto trial = cox_partial_likelihood(sample, next);
    std::size_t halvings = 0;
    // near the optimum the value is flat to rounding; accept a full step
    // that shrinks the score instead of halving it away
    auto accept = [&] {
      return trial.value >= pl.value ||
             (halvings == 0 && trial.value >= pl.value - 1e-13 * std::abs(pl.value) &&
              trial.score.norm() < pl.score.norm());
    };
    while (!accept() && halvings < options.max_halvings) {
      scale *= 0.5;
      next = fit.beta + scale * step;
      trial = cox_partial_likelihood(sample, next);
      ++halvings;
    }
    ++fit.iterations;
    if (!accept()) break;  // no ascent left at machine precision
    fit.beta = next;
    pl = std::move(trial);
    fit.loglik_path.push_back(pl.value);
    if (fit.beta.cwiseAbs().maxCoeff() > options.divergence_limit) {
      throw MonotoneLikelihoodError("coefficients diverge (monotone likelihood)");
    }
  }
  fit.score_norm = pl.score.cwiseAbs().maxCoeff();
  fit.information = pl.information;
  fit.breslow = breslow_estimator(sample, fit.beta);
  return fit;
}

TestResult cox_score_test(const RightCensoredSample& sample, const Eigen::VectorXd& beta0) {
  check_cox_input(sample);
  if (sample.dim() == 0) throw DomainError("score test needs covariates");
  const auto pl = cox_partial_likelihood(sample, beta0);
  const Eigen::MatrixXd inv = inverse_information(pl.information);
  TestResult out;
  out.statistic = std::max(0.0, pl.score.dot(inv * pl.score));
  out.df = static_cast<int>(sample.dim());
  out.p_value = chi2_sf(out.statistic, out.df);
  out.score = pl.score;
  out.variance = pl.information;
  if (sample.dim() == 1) out.z = pl.score[0] / std::sqrt(pl.information(0, 0));
  return out;
}

std::vector<double> smoothed_baseline(const CoxFit& fit, double bandwidth, Kernel kernel,
                                      std::span<const double> grid) {
  return smoothed_hazard(fit.breslow, bandwidth, kernel, grid);
}

}  // namespace hazardforge
