#include <cmath>

#include "hazardforge/errors.hpp"
#include "hazardforge/regress.hpp"

namespace hazardforge {
namespace {

struct Evaluation {
  double value;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Weibull log-likelihood in (a, b) = (log shape, log scale):
// Σ D_i (a − b + (k − 1) u_i) − Σ exp(k u_i), u_i = log t_i − b.
Evaluation weibull_loglik(const RightCensoredSample& s, double a, double b) {
  const double k = std::exp(a);
  Evaluation e{0.0, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2)};
  double events = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.time(i);
    if (t == 0.0) continue;  // Λ(0) = 0 and censored at 0 carries nothing
    const double u = std::log(t) - b;
    const double g = std::exp(k * u);
    const double di = s.event(i) ? 1.0 : 0.0;
    events += di;
    e.value += di * (a - b + (k - 1.0) * u) - g;
    e.grad[0] += di * (1.0 + k * u) - k * u * g;
    e.grad[1] += k * g;
    e.hess(0, 0) += di * k * u - k * u * g * (1.0 + k * u);
    e.hess(0, 1) += k * g * (1.0 + k * u);
    e.hess(1, 1) -= k * k * g;
  }
  e.grad[1] -= k * events;
  e.hess(0, 1) -= k * events;
  e.hess(1, 0) = e.hess(0, 1);
  return e;
}

}  // namespace

ParametricFit parametric_fit(const RightCensoredSample& sample, ParametricFamily family,
                             const ParametricOptions& options) {
  const double events = static_cast<double>(sample.event_count());
  if (events == 0.0) throw DomainError("parametric fit needs at least one event");
  double exposure = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    exposure += sample.time(i);
    if (sample.event(i) && sample.time(i) == 0.0) {
      throw DomainError("an event at time 0 has zero likelihood under these families");
    }
  }
  const double rate = events / exposure;
  ParametricFit fit;
  fit.family = family;
  if (family == ParametricFamily::exponential) {
    // the score in log(rate) vanishes at D/Σt; nothing to iterate
    fit.theta = Eigen::VectorXd::Constant(1, rate);
    fit.information = Eigen::MatrixXd::Constant(1, 1, events);
    fit.loglik = events * std::log(rate) - rate * exposure;
    fit.converged = true;
    return fit;
  }

  double a = options.fixed_shape ? std::log(*options.fixed_shape) : 0.0;
  double b = -std::log(rate);
  if (options.fixed_shape) {
    // profile scale in closed form: σ^k = Σ t^k / D
    const double k = *options.fixed_shape;
    if (!(k > 0.0)) throw DomainError("shape must be positive");
    double sum = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) sum += std::pow(sample.time(i), k);
    b = std::log(sum / events) / k;
    const auto e = weibull_loglik(sample, a, b);
    fit.theta = Eigen::Vector2d(k, std::exp(b));
    fit.information = -e.hess;
    fit.loglik = e.value;
    fit.converged = true;
    return fit;
  }
  auto e = weibull_loglik(sample, a, b);
  while (fit.iterations < options.max_iter) {
    if (e.grad.cwiseAbs().maxCoeff() < options.tol * std::max(1.0, events)) {
      fit.converged = true;
      break;
    }
    Eigen::Vector2d step;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-e.hess);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      step = ldlt.solve(e.grad);
    } else {
      step = 0.1 * e.grad;  // gradient ascent until the Hessian is definite
    }
    double scale = 1.0;
    auto trial = weibull_loglik(sample, a + step[0], b + step[1]);
    // near the optimum the value is flat to rounding; accept a full step
    // that shrinks the gradient instead of halving it away
    auto accept = [&] {
      return trial.value >= e.value ||
             (scale == 1.0 && trial.value >= e.value - 1e-13 * std::abs(e.value) &&
              trial.grad.norm() < e.grad.norm());
    };
    for (int h = 0; h < 40 && !accept(); ++h) {
      scale *= 0.5;
      trial = weibull_loglik(sample, a + scale * step[0], b + scale * step[1]);
    }
    ++fit.iterations;
    if (!accept()) break;
    a += scale * step[0];
    b += scale * step[1];
    e = std::move(trial);
  }
  fit.theta = Eigen::Vector2d(std::exp(a), std::exp(b));
  fit.information = -e.hess;
  fit.loglik = e.value;
  return fit;
}

}  // namespace hazardforge
