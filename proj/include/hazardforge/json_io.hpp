#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <optional>
#include <vector>

#include "hazardforge/bands.hpp"
#include "hazardforge/dabrowska.hpp"
#include "hazardforge/diagnostics.hpp"
#include "hazardforge/logrank.hpp"
#include "hazardforge/multistate.hpp"
#include "hazardforge/nonparam.hpp"
#include "hazardforge/npmle.hpp"
#include "hazardforge/regress.hpp"

namespace hazardforge {

// Key order is fixed by insertion so identical results serialize to
// identical bytes. Non-finite numbers become the strings "inf", "-inf", "nan".
using Json = nlohmann::ordered_json;

Json number(double x);
Json to_json(const std::vector<double>& v);
Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);  // array of rows

Json to_json(const StepFunction& f);  // {"initial", "times", "values"}
Json to_json(const Band& band);
/// Curve schema: kind, times, estimate, variance, and band when present.
Json to_json(const CurveEstimate& curve, const std::optional<Band>& band = std::nullopt);
Json to_json(const QuantileEstimate& q);
Json to_json(const BivariateSurfaceEstimate& est);
Json to_json(const TransitionEstimate& est);
Json to_json(const CIFEstimate& cif);
Json to_json(const ExcessMortality& em);
Json to_json(const TurnbullProblem& problem, const TurnbullSolution& solution);
Json to_json(const TestResult& result);
Json to_json(const CoxFit& fit);
Json to_json(const AdditiveFit& fit);
Json to_json(const BJFit& fit);
Json to_json(const ParametricFit& fit);
Json to_json(const BeranEstimate& est);
Json to_json(const ResidualSet& residuals);
Json to_json(const CoxSnellPlot& plot);
Json to_json(const ArjasSeries& series);
Json to_json(const AndersenPlot& plot);

}  // namespace hazardforge
