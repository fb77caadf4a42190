#include "hazardforge/json_io.hpp"

#include <cmath>

namespace hazardforge {

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

namespace {

template <class Range>
Json array_of(const Range& r) {
  Json out = Json::array();
  for (double x : r) out.push_back(number(x));
  return out;
}

Json array_of_int(const Eigen::VectorXi& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json grid_point(const GridPoint& g) {
  return Json{{"value", number(g.value)}, {"before", g.before}};
}

}  // namespace

Json to_json(const std::vector<double>& v) { return array_of(v); }

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
  return out;
}

Json to_json(const StepFunction& f) {
  Json j;
  j["initial"] = number(f.initial_value());
  j["times"] = array_of(f.jump_times());
  j["values"] = array_of(f.values());
  return j;
}

Json to_json(const Band& band) {
  Json j;
  j["times"] = array_of(band.times);
  j["lo"] = array_of(band.lo);
  j["hi"] = array_of(band.hi);
  j["critical_value"] = number(band.critical_value);
  j["c1"] = number(band.c1);
  j["c2"] = number(band.c2);
  return j;
}

Json to_json(const CurveEstimate& curve, const std::optional<Band>& band) {
  Json j;
  j["kind"] = curve.kind == CurveKind::survival ? "survival" : "cumulative_hazard";
  j["times"] = array_of(curve.estimate.jump_times());
  j["estimate"] = array_of(curve.estimate.values());
  std::vector<double> var;
  for (double t : curve.estimate.jump_times()) var.push_back(curve.variance(t));
  j["variance"] = array_of(var);
  j["n"] = curve.n;
  if (curve.saturation_time) j["saturation_time"] = number(*curve.saturation_time);
  if (band) j["band"] = to_json(*band);
  return j;
}

Json to_json(const QuantileEstimate& q) {
  Json j;
  j["p"] = number(q.p);
  j["quantile"] = number(q.quantile);
  if (q.ci) {
    j["ci"] = Json{{"lo", number(q.ci->lo)}, {"hi", number(q.ci->hi)}};
  } else {
    j["ci"] = nullptr;
  }
  j["inversion_set"] = array_of(q.inversion);
  return j;
}

Json to_json(const BivariateSurfaceEstimate& est) {
  Json j;
  j["grid_s"] = array_of(est.grid_s);
  j["grid_t"] = array_of(est.grid_t);
  j["surface"] = to_json(est.surface);
  j["marginal_s"] = to_json(est.marginal_s);
  j["marginal_t"] = to_json(est.marginal_t);
  return j;
}

Json to_json(const TransitionEstimate& est) {
  Json j;
  j["states"] = est.states;
  Json series = Json::array();
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(est.states, est.states);
  const auto& times = est.hazard.jump_times();
  for (std::size_t k = 0; k < times.size(); ++k) {
    p = p * (Eigen::MatrixXd::Identity(est.states, est.states) + est.hazard.increments()[k]);
    Json row;
    row["time"] = number(times[k]);
    row["transition"] = to_json(p);
    row["at_risk"] = to_json(est.at_risk[k]);
    series.push_back(std::move(row));
  }
  j["series"] = std::move(series);
  return j;
}

Json to_json(const CIFEstimate& cif) {
  Json j;
  j["overall_survival"] = to_json(cif.overall_survival);
  Json causes = Json::array();
  for (std::size_t c = 0; c < cif.causes.size(); ++c) {
    causes.push_back(Json{{"cause", cif.causes[c]}, {"incidence", to_json(cif.incidence[c])}});
  }
  j["causes"] = std::move(causes);
  return j;
}

Json to_json(const ExcessMortality& em) {
  Json j;
  j["discrete"] = to_json(em.discrete);
  std::vector<double> gamma;
  std::vector<double> corrected;
  for (double t : em.grid) {
    gamma.push_back(em.gamma(t));
    corrected.push_back(em.corrected_survival(t));
  }
  j["grid"] = array_of(em.grid);
  j["expected"] = array_of(em.expected);
  j["gamma"] = array_of(gamma);
  j["corrected_survival"] = array_of(corrected);
  return j;
}

Json to_json(const TurnbullProblem& problem, const TurnbullSolution& solution) {
  Json j;
  Json intervals = Json::array();
  for (std::size_t s = 0; s < problem.m(); ++s) {
    intervals.push_back(Json{{"left", grid_point(problem.left(s))},
                             {"right", grid_point(problem.right(s))},
                             {"mass", number(solution.p[static_cast<Eigen::Index>(s)])},
                             {"d", number(solution.certificate.d[static_cast<Eigen::Index>(s)])}});
  }
  j["n"] = problem.n();
  j["support"] = std::move(intervals);
  j["loglik"] = number(solution.loglik);
  j["iterations"] = solution.iterations;
  j["newton_steps"] = solution.newton_steps;
  j["converged"] = solution.converged;
  j["monotone"] = solution.monotone;
  j["certificate"] = Json{{"max_d", number(solution.certificate.max_d)},
                          {"is_npmle", solution.certificate.is_npmle}};
  return j;
}

Json to_json(const TestResult& result) {
  Json j;
  j["statistic"] = number(result.statistic);
  if (result.z) j["z"] = number(*result.z);
  j["df"] = result.df;
  j["p_value"] = number(result.p_value);
  Json table = Json::array();
  for (Eigen::Index h = 0; h < result.observed.size(); ++h) {
    Json row;
    if (static_cast<std::size_t>(h) < result.groups.size()) row["group"] = result.groups[h];
    row["observed"] = number(result.observed[h]);
    row["expected"] = number(result.expected[h]);
    if (h < result.score.size()) row["score"] = number(result.score[h]);
    table.push_back(std::move(row));
  }
  j["groups"] = std::move(table);
  j["variance"] = to_json(result.variance);
  if (result.smr) j["smr"] = number(*result.smr);
  j["warnings"] = result.warnings;
  return j;
}

Json to_json(const CoxFit& fit) {
  Json j;
  j["coefficients"] = to_json(fit.beta);
  j["standard_errors"] = to_json(fit.standard_errors());
  j["information"] = to_json(fit.information);
  j["loglik"] = number(fit.loglik());
  j["loglik_path"] = array_of(fit.loglik_path);
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["score_norm"] = number(fit.score_norm);
  j["events"] = fit.events;
  j["baseline"] = to_json(fit.breslow);
  return j;
}

Json to_json(const AdditiveFit& fit) {
  Json j;
  Json coefs = Json::array();
  for (std::size_t c = 0; c < fit.coefficients.size(); ++c) {
    std::vector<double> var;
    for (double t : fit.times) var.push_back(fit.covariance(t)(static_cast<Eigen::Index>(c),
                                                               static_cast<Eigen::Index>(c)));
    Json cj = to_json(fit.coefficients[c]);
    cj["variance"] = array_of(var);
    coefs.push_back(std::move(cj));
  }
  j["times"] = array_of(fit.times);
  j["coefficients"] = std::move(coefs);
  j["skipped_times"] = array_of(fit.skipped_times);
  return j;
}

Json to_json(const BJFit& fit) {
  Json j;
  j["coefficients"] = to_json(fit.beta);
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["cycled"] = fit.cycled;
  return j;
}

Json to_json(const ParametricFit& fit) {
  Json j;
  j["family"] = fit.family == ParametricFamily::exponential ? "exponential" : "weibull";
  if (fit.family == ParametricFamily::exponential) {
    j["rate"] = number(fit.theta[0]);
  } else {
    j["shape"] = number(fit.theta[0]);
    j["scale"] = number(fit.theta[1]);
  }
  j["information_log_scale"] = to_json(fit.information);
  j["loglik"] = number(fit.loglik);
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  return j;
}

Json to_json(const BeranEstimate& est) {
  Json j;
  j["hazard"] = to_json(est.hazard);
  j["survival"] = to_json(est.survival);
  return j;
}

Json to_json(const ResidualSet& residuals) {
  Json j;
  j["martingale"] = to_json(residuals.martingale);
  j["deviance"] = to_json(residuals.deviance);
  j["cox_snell"] = to_json(residuals.cox_snell);
  j["status"] = array_of_int(residuals.status);
  return j;
}

Json to_json(const CoxSnellPlot& plot) {
  Json j;
  j["hazard"] = to_json(plot.hazard);
  j["percentile90"] = number(plot.percentile90);
  j["slope"] = number(plot.slope);
  return j;
}

Json to_json(const ArjasSeries& series) {
  Json j;
  j["stratum"] = series.stratum;
  j["times"] = array_of(series.times);
  j["observed"] = array_of(series.observed);
  j["expected"] = array_of(series.expected);
  return j;
}

Json to_json(const AndersenPlot& plot) {
  Json j;
  j["reference"] = plot.reference;
  j["other"] = plot.other;
  j["times"] = array_of(plot.times);
  j["reference_hazard"] = array_of(plot.reference_hazard);
  j["other_hazard"] = array_of(plot.other_hazard);
  j["slope"] = number(plot.slope);
  return j;
}

}  // namespace hazardforge
