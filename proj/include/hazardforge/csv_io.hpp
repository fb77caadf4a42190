#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include "hazardforge/samples.hpp"

namespace hazardforge {

enum class CsvSchema { right_censored, interval, multistate, bivariate };

/// Which extra columns of a right-censored file carry integer labels.
/// Every other column after `time,status` is a covariate.
struct RightCensoredColumns {
  std::string group = "group";
  std::string strata;
  std::string cause;
};

RightCensoredSample read_right_censored(std::istream& in, const RightCensoredColumns& cols = {});
IntervalCensoredSample read_interval(std::istream& in);
/// `states` fixes the state-space size; otherwise it is max label + 1.
MultiStateHistory read_multistate(std::istream& in, std::optional<int> states = std::nullopt);
BivariateSample read_bivariate(std::istream& in);

using AnySample =
    std::variant<RightCensoredSample, IntervalCensoredSample, MultiStateHistory, BivariateSample>;

AnySample read_csv(const std::filesystem::path& path, CsvSchema schema,
                   const RightCensoredColumns& cols = {});

/// Writers emit the same schemas the readers accept. Covariates are named
/// z1..zd, labels group/stratum/cause.
void write_right_censored(std::ostream& out, const RightCensoredSample& sample);
void write_interval(std::ostream& out, const IntervalCensoredSample& sample);
void write_multistate(std::ostream& out, const MultiStateHistory& history);

/// Shortest decimal that round-trips the double.
std::string format_double(double x);

}  // namespace hazardforge
