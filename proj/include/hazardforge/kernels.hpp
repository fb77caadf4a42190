#pragma once

#include <string_view>

namespace hazardforge {

/// Smoothing kernels supported on [-1, 1] with unit integral.
enum class Kernel { epanechnikov, uniform, biweight };

double kernel_weight(Kernel k, double u);
Kernel parse_kernel(std::string_view name);
std::string_view kernel_name(Kernel k);

}  // namespace hazardforge
