#include "hazardforge/simlab.hpp"

#include <algorithm>
#include <cmath>

#include "hazardforge/errors.hpp"
#include "hazardforge/rng.hpp"

namespace hazardforge {

void SimConfig::validate() const {
  if (n == 0) throw ValidationError("simulation needs n >= 1");
  if (event.kind == EventLaw::Kind::exponential && !(event.rate > 0.0)) {
    throw ValidationError("event rate must be positive");
  }
  if (event.kind == EventLaw::Kind::weibull && !(event.shape > 0.0 && event.scale > 0.0)) {
    throw ValidationError("Weibull shape and scale must be positive");
  }
  if (censor.kind == CensorLaw::Kind::exponential && !(censor.rate > 0.0)) {
    throw ValidationError("censoring rate must be positive");
  }
  if ((censor.kind == CensorLaw::Kind::uniform || censor.kind == CensorLaw::Kind::admin) &&
      !(censor.upper > 0.0)) {
    throw ValidationError("censoring bound must be positive");
  }
  if (covariates.kind == CovariateLaw::Kind::bernoulli && !(covariates.p >= 0.0 && covariates.p <= 1.0)) {
    throw ValidationError("Bernoulli p must lie in [0, 1]");
  }
  if (covariates.kind == CovariateLaw::Kind::normal && covariates.dim < 1) {
    throw ValidationError("normal covariates need dim >= 1");
  }
  const int d = covariates.kind == CovariateLaw::Kind::none
                    ? 0
                    : (covariates.kind == CovariateLaw::Kind::bernoulli ? 1 : covariates.dim);
  if (model.kind != ModelSpec::Kind::none && model.beta.size() != d) {
    throw ValidationError("model coefficients must match the covariate dimension");
  }
  if (model.kind == ModelSpec::Kind::aft && !(model.sigma > 0.0)) {
    throw ValidationError("AFT sigma must be positive");
  }
  if (markov) {
    const auto& q = markov->rates;
    if (q.rows() != q.cols() || q.rows() < 1) throw ValidationError("rate matrix must be square");
    for (Eigen::Index h = 0; h < q.rows(); ++h) {
      for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (h != j && q(h, j) < 0.0) throw ValidationError("off-diagonal rates must be nonnegative");
      }
      if (std::abs(q.row(h).sum()) > 1e-12 * std::max(1.0, q.row(h).cwiseAbs().sum())) {
        throw ValidationError("rate matrix rows must sum to zero");
      }
    }
    if (!(markov->horizon > 0.0)) throw ValidationError("horizon must be positive");
    if (markov->initial.size() != 0) {
      if (markov->initial.size() != q.rows() || (markov->initial.array() < 0.0).any() ||
          !(markov->initial.sum() > 0.0)) {
        throw ValidationError("initial distribution must be nonnegative with one entry per state");
      }
    }
  }
}

SimConfig replicate(const SimConfig& config, std::uint64_t r) {
  SimConfig c = config;
  c.seed = stream_seed(config.seed, r);
  return c;
}

namespace {

double censor_draw(const CensorLaw& law, Rng& rng) {
  switch (law.kind) {
    case CensorLaw::Kind::none:
      return kInf;
    case CensorLaw::Kind::exponential:
      return rng.exponential(law.rate);
    case CensorLaw::Kind::uniform:
      return law.upper * rng.uniform();
    case CensorLaw::Kind::admin:
      return law.upper;
  }
  return kInf;
}

}  // namespace

RightCensoredSample simulate_right_censored(const SimConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto n = static_cast<Eigen::Index>(config.n);
  const int d = config.covariates.kind == CovariateLaw::Kind::none
                    ? 0
                    : (config.covariates.kind == CovariateLaw::Kind::bernoulli
                           ? 1
                           : config.covariates.dim);
  Eigen::VectorXd time(n);
  Eigen::VectorXi status(n);
  Eigen::MatrixXd z(n, d);
  std::vector<int> group;
  for (Eigen::Index i = 0; i < n; ++i) {
    // fixed draw order per subject: covariates, event, censoring
    for (int j = 0; j < d; ++j) {
      z(i, j) = config.covariates.kind == CovariateLaw::Kind::bernoulli
                    ? (rng.bernoulli(config.covariates.p) ? 1.0 : 0.0)
                    : rng.normal();
    }
    if (config.covariates.kind == CovariateLaw::Kind::bernoulli) {
      group.push_back(static_cast<int>(z(i, 0)));
    }
    const double lp = config.model.kind == ModelSpec::Kind::none || d == 0
                          ? 0.0
                          : z.row(i).dot(config.model.beta);
    double x = 0.0;
    if (config.model.kind == ModelSpec::Kind::aft) {
      x = std::exp(lp + config.model.sigma * rng.normal());
    } else {
      const double e = -std::log(rng.uniform()) * std::exp(-lp);  // Λ0(X) ~ Exp(1)·e^{-lp}
      if (config.event.kind == EventLaw::Kind::exponential) {
        x = e / config.event.rate;
      } else {
        x = config.event.scale * std::pow(e, 1.0 / config.event.shape);
      }
    }
    const double c = censor_draw(config.censor, rng);
    time[i] = std::min(x, c);
    status[i] = x <= c ? 1 : 0;
  }
  return RightCensoredSample(std::move(time), std::move(status), std::move(z), std::move(group));
}

MultiStateHistory simulate_markov(const SimConfig& config) {
  config.validate();
  if (!config.markov) throw ValidationError("configuration has no Markov part");
  const auto& spec = *config.markov;
  const auto& q = spec.rates;
  const int k = static_cast<int>(q.rows());
  Eigen::VectorXd initial = spec.initial;
  if (initial.size() == 0) {
    initial = Eigen::VectorXd::Zero(k);
    initial[0] = 1.0;
  }
  Rng rng(config.seed);
  std::vector<SubjectPath> subjects;
  subjects.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    SubjectPath path;
    path.initial_state = static_cast<int>(rng.categorical(initial));
    const double stop = std::min(spec.horizon, censor_draw(config.censor, rng));
    int state = path.initial_state;
    double t = 0.0;
    while (true) {
      const double out_rate = -q(state, state);
      if (!(out_rate > 0.0)) break;  // absorbing
      t += rng.exponential(out_rate);
      if (t > stop) break;
      Eigen::VectorXd jump = q.row(state).transpose();
      jump[state] = 0.0;
      const int next = static_cast<int>(rng.categorical(jump));
      path.transitions.push_back({t, state, next});
      state = next;
    }
    if (spec.record_censoring) path.censor_time = stop;
    subjects.push_back(std::move(path));
  }
  return MultiStateHistory(k, std::move(subjects));
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw DomainError("grid needs lo <= hi and step > 0");
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) g.push_back(lo + static_cast<double>(k) * step);
  return g;
}

double oracle_partial_likelihood(const RightCensoredSample& sample,
                                 const std::vector<double>& grid) {
  if (sample.dim() != 1) throw DomainError("grid oracle handles one covariate");
  if (grid.empty()) throw DomainError("grid is empty");
  const std::size_t n = sample.size();
  double best_beta = grid.front();
  double best = -kInf;
  for (double beta : grid) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!sample.event(i)) continue;
      double denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (sample.time(j) >= sample.time(i)) {
          denom += std::exp(beta * sample.covariates()(static_cast<Eigen::Index>(j), 0));
        }
      }
      ll += beta * sample.covariates()(static_cast<Eigen::Index>(i), 0) - std::log(denom);
    }
    if (ll > best) {
      best = ll;
      best_beta = beta;
    }
  }
  return best_beta;
}

Eigen::VectorXd oracle_simplex_search(const TurnbullProblem& problem, double step) {
  const auto m = problem.m();
  if (m == 0) throw DomainError("problem has no support intervals");
  if (m > 3) throw DomainError("simplex search is limited to three support intervals");
  if (!(step > 0.0 && step <= 1.0)) throw DomainError("step must lie in (0, 1]");
  const Eigen::MatrixXd a = problem.support_alpha();
  const auto ticks = static_cast<long>(std::llround(1.0 / step));
  Eigen::VectorXd best_p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  double best = -kInf;
  auto consider = [&](const Eigen::VectorXd& p) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) ll += std::log(a.row(i).dot(p));
    if (ll > best) {
      best = ll;
      best_p = p;
    }
  };
  Eigen::VectorXd p(static_cast<Eigen::Index>(m));
  if (m == 1) {
    p[0] = 1.0;
    consider(p);
    return best_p;
  }
  for (long i = 0; i <= ticks; ++i) {
    if (m == 2) {
      p << static_cast<double>(i) / ticks, static_cast<double>(ticks - i) / ticks;
      consider(p);
      continue;
    }
    for (long j = 0; i + j <= ticks; ++j) {
      p << static_cast<double>(i) / ticks, static_cast<double>(j) / ticks,
          static_cast<double>(ticks - i - j) / ticks;
      consider(p);
    }
  }
  return best_p;
}

}  // namespace hazardforge
