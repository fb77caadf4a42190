#include "hazardforge/kernels.hpp"

#include <cmath>
#include <string>

#include "hazardforge/errors.hpp"

namespace hazardforge {

double kernel_weight(Kernel k, double u) {
  if (std::abs(u) > 1.0) return 0.0;
  switch (k) {
    case Kernel::epanechnikov:
      return 0.75 * (1.0 - u * u);
    case Kernel::uniform:
      return 0.5;
    case Kernel::biweight: {
      const double v = 1.0 - u * u;
      return 15.0 / 16.0 * v * v;
    }
  }
  return 0.0;
}

Kernel parse_kernel(std::string_view name) {
  if (name == "epanechnikov") return Kernel::epanechnikov;
  if (name == "uniform") return Kernel::uniform;
  if (name == "biweight") return Kernel::biweight;
  throw DomainError("unknown kernel '" + std::string(name) + "'");
}

std::string_view kernel_name(Kernel k) {
  switch (k) {
    case Kernel::epanechnikov:
      return "epanechnikov";
    case Kernel::uniform:
      return "uniform";
    case Kernel::biweight:
      return "biweight";
  }
  return "?";
}

}  // namespace hazardforge
