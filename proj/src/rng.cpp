#include "hazardforge/rng.hpp"

#include <cmath>

#include "hazardforge/distributions.hpp"

namespace hazardforge {

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

double Rng::weibull(double shape, double scale) {
  return scale * std::pow(-std::log(uniform()), 1.0 / shape);
}

double Rng::normal() { return normal_quantile(uniform()); }

}  // namespace hazardforge
