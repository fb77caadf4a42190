#include "hazardforge/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hazardforge/errors.hpp"

namespace hazardforge {
namespace {

Eigen::VectorXd risk_scores(const CoxFit& fit, const RightCensoredSample& sample) {
  if (fit.beta.size() != sample.dim()) throw DomainError("fit does not match the covariates");
  return (sample.covariates() * fit.beta).array().exp();
}

}  // namespace

double deviance_residual(double m, int status) {
  const double d = status == 1 ? 1.0 : 0.0;
  const double inner = d > 0.0 ? m + d * std::log(d - m) : m;
  const double v = std::sqrt(std::max(0.0, -2.0 * inner));
  return m < 0.0 ? -v : v;
}

ResidualSet martingale_residuals(const CoxFit& fit, const RightCensoredSample& sample) {
  const auto risk = risk_scores(fit, sample);
  const auto n = static_cast<Eigen::Index>(sample.size());
  ResidualSet out;
  out.martingale.resize(n);
  out.cox_snell.resize(n);
  out.status = sample.status();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out.cox_snell[i] = risk[i] * fit.breslow.value(sample.time(idx));
    out.martingale[i] = (sample.event(idx) ? 1.0 : 0.0) - out.cox_snell[i];
  }
  out.deviance = deviance_residuals(out);
  return out;
}

Eigen::VectorXd deviance_residuals(const ResidualSet& r) {
  Eigen::VectorXd out(r.martingale.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = deviance_residual(r.martingale[i], r.status[i]);
  return out;
}

CoxSnellPlot cox_snell(const CoxFit& fit, const RightCensoredSample& sample) {
  const auto res = martingale_residuals(fit, sample);
  CoxSnellPlot plot;
  plot.residuals = res.cox_snell;
  plot.status = res.status;
  std::vector<double> r(res.cox_snell.begin(), res.cox_snell.end());
  std::vector<int> d(res.status.begin(), res.status.end());
  plot.hazard = nelson_aalen(r, d);
  std::sort(r.begin(), r.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(r.size()))) - 1;
  plot.percentile90 = r[std::min(idx, r.size() - 1)];
  plot.slope = plot.percentile90 > 0.0 ? plot.hazard.estimate.value(plot.percentile90) / plot.percentile90
                                       : 0.0;
  return plot;
}

std::vector<ArjasSeries> arjas_plot_data(const CoxFit& fit, const RightCensoredSample& sample,
                                         const std::vector<int>& strata) {
  if (strata.size() != sample.size()) throw ValidationError("need one stratum label per record");
  const auto risk = risk_scores(fit, sample);
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < strata.size(); ++i) members[strata[i]].push_back(i);
  std::vector<ArjasSeries> out;
  for (auto& [label, rows] : members) {
    ArjasSeries series;
    series.stratum = label;
    std::sort(rows.begin(), rows.end(),
              [&](std::size_t a, std::size_t b) { return sample.time(a) < sample.time(b); });
    // E_h(t) = Σ_{T_i <= t} r_i Â0(T_i) + Â0(t) Σ_{T_i > t} r_i
    double risk_left = 0.0;
    for (auto i : rows) risk_left += risk[static_cast<Eigen::Index>(i)];
    double settled = 0.0;
    std::size_t pos = 0;
    double m = 0.0;
    while (pos < rows.size()) {
      const double t = sample.time(rows[pos]);
      double events = 0.0;
      for (; pos < rows.size() && sample.time(rows[pos]) == t; ++pos) {
        const auto i = static_cast<Eigen::Index>(rows[pos]);
        settled += risk[i] * fit.breslow.value(t);
        risk_left -= risk[i];
        if (sample.event(rows[pos])) events += 1.0;
      }
      const double expected = settled + fit.breslow.value(t) * std::max(0.0, risk_left);
      for (double e = 0.0; e < events; e += 1.0) {
        m += 1.0;
        series.times.push_back(t);
        series.observed.push_back(m);
        series.expected.push_back(expected);
      }
    }
    out.push_back(std::move(series));
  }
  return out;
}

AndersenPlot andersen_plot_data(const RightCensoredSample& sample, const std::vector<int>& strata,
                                std::size_t min_at_risk) {
  if (strata.size() != sample.size()) throw ValidationError("need one stratum label per record");
  std::vector<int> labels = strata;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.size() != 2) throw DomainError("Andersen plot needs exactly two strata");
  AndersenPlot plot;
  plot.reference = labels[0];
  plot.other = labels[1];
  StepFunction baseline[2];
  std::vector<double> times_in[2];
  for (int s = 0; s < 2; ++s) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < strata.size(); ++i) {
      if (strata[i] == labels[static_cast<std::size_t>(s)]) rows.push_back(i);
    }
    const auto part = sample.subset(rows);
    try {
      baseline[s] = cox_fit(part).breslow;
    } catch (const Error& e) {
      throw NumericalError("stratum " + std::to_string(labels[static_cast<std::size_t>(s)]) +
                           ": " + e.what());
    }
    for (auto i : rows) times_in[s].push_back(sample.time(i));
    std::sort(times_in[s].begin(), times_in[s].end());
  }
  auto at_risk = [&](int s, double t) {
    const auto& v = times_in[s];
    return static_cast<std::size_t>(v.end() - std::lower_bound(v.begin(), v.end(), t));
  };
  std::vector<double> grid(baseline[0].jump_times().begin(), baseline[0].jump_times().end());
  grid.insert(grid.end(), baseline[1].jump_times().begin(), baseline[1].jump_times().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double sxy = 0.0;
  double sxx = 0.0;
  for (double t : grid) {
    if (at_risk(0, t) < min_at_risk || at_risk(1, t) < min_at_risk) continue;
    const double x = baseline[0].value(t);
    const double y = baseline[1].value(t);
    if (!(x > 0.0 && y > 0.0)) continue;
    plot.times.push_back(t);
    plot.reference_hazard.push_back(x);
    plot.other_hazard.push_back(y);
    plot.log_reference.push_back(std::log(x));
    plot.log_other.push_back(std::log(y));
    sxy += x * y;
    sxx += x * x;
  }
  if (!(sxx > 0.0)) throw DomainError("strata share no event times with enough subjects at risk");
  plot.slope = sxy / sxx;
  return plot;
}

}  // namespace hazardforge
