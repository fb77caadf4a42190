#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "hazardforge/npmle.hpp"
#include "hazardforge/samples.hpp"

namespace hazardforge {

struct EventLaw {
  enum class Kind { exponential, weibull } kind = Kind::exponential;
  double rate = 1.0;   // exponential
  double shape = 1.0;  // weibull: hazard (k/σ)(t/σ)^{k−1}
  double scale = 1.0;
};

struct CensorLaw {
  enum class Kind { none, exponential, uniform, admin } kind = Kind::none;
  double rate = 1.0;   // exponential
  double upper = 1.0;  // uniform(0, upper) or the administrative time
};

struct CovariateLaw {
  enum class Kind { none, bernoulli, normal } kind = Kind::none;
  double p = 0.5;  // bernoulli
  int dim = 1;     // normal(0, 1)^dim
};

/// cox: hazard multiplied by exp(βᵀZ). aft: log T = βᵀZ + σ ε, ε ~ N(0, 1)
/// (log-normal; the event law is not used).
struct ModelSpec {
  enum class Kind { none, cox, aft } kind = Kind::none;
  Eigen::VectorXd beta;
  double sigma = 1.0;
};

/// Homogeneous Markov process with generator `rates`, followed on
/// [0, horizon]. Start states are drawn from `initial` (default: state 0).
struct MarkovSpec {
  Eigen::MatrixXd rates;
  double horizon = 1.0;
  Eigen::VectorXd initial;
  bool record_censoring = true;  // mark the horizon (and censor law) as censoring
};

struct SimConfig {
  std::size_t n = 100;
  std::uint64_t seed = 0;
  EventLaw event;
  CensorLaw censor;
  CovariateLaw covariates;
  ModelSpec model;
  std::optional<MarkovSpec> markov;

  void validate() const;
};

/// With a Bernoulli covariate the 0/1 values are also stored as group labels.
RightCensoredSample simulate_right_censored(const SimConfig& config);
MultiStateHistory simulate_markov(const SimConfig& config);

/// Configuration for replicate r of a run: same law, derived seed.
SimConfig replicate(const SimConfig& config, std::uint64_t r);

/// Argmax of the log partial likelihood (Breslow ties) over `grid`, computed
/// by direct risk-set enumeration. Needs exactly one covariate.
double oracle_partial_likelihood(const RightCensoredSample& sample,
                                 const std::vector<double>& grid);
std::vector<double> uniform_grid(double lo, double hi, double step);

/// Best point of the simplex grid with spacing `step` for at most three
/// support intervals.
Eigen::VectorXd oracle_simplex_search(const TurnbullProblem& problem, double step);

}  // namespace hazardforge
