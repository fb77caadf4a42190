#include "hazardforge/multistate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hazardforge/errors.hpp"
#include "hazardforge/nonparam.hpp"

namespace hazardforge {
namespace {

struct Event {
  double time;
  std::size_t subject;
  int from;
  int to;  // -1: censoring
};

// Sweep over all transitions and censorings in time order, events before
// censorings at equal times.
std::vector<Event> sorted_events(const MultiStateHistory& history) {
  std::vector<Event> events;
  for (std::size_t s = 0; s < history.size(); ++s) {
    const auto& path = history.subjects()[s];
    int state = path.initial_state;
    for (const auto& tr : path.transitions) {
      events.push_back({tr.time, s, tr.from, tr.to});
      state = tr.to;
    }
    if (path.censor_time && std::isfinite(*path.censor_time)) {
      events.push_back({*path.censor_time, s, state, -1});
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.to != -1 && b.to == -1;
  });
  return events;
}

Eigen::VectorXd initial_counts(const MultiStateHistory& history) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(history.states());
  for (const auto& path : history.subjects()) y[path.initial_state] += 1.0;
  return y;
}

}  // namespace

Eigen::MatrixXd TransitionEstimate::transition(double s, double t) const {
  return product_integral(hazard, s, t);
}

TransitionEstimate aalen_johansen(const MultiStateHistory& history) {
  const int k = history.states();
  TransitionEstimate est;
  est.states = k;
  est.initial_occupancy = initial_counts(history);
  Eigen::VectorXd y = est.initial_occupancy;
  const auto events = sorted_events(history);
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> increments;
  std::size_t i = 0;
  while (i < events.size()) {
    const double t = events[i].time;
    Eigen::MatrixXd dn = Eigen::MatrixXd::Zero(k, k);
    std::size_t j = i;
    for (; j < events.size() && events[j].time == t && events[j].to != -1; ++j) {
      dn(events[j].from, events[j].to) += 1.0;
    }
    if (j > i) {
      Eigen::MatrixXd da = Eigen::MatrixXd::Zero(k, k);
      for (int h = 0; h < k; ++h) {
        if (y[h] == 0.0) continue;
        double row = 0.0;
        for (int l = 0; l < k; ++l) {
          if (l == h || dn(h, l) == 0.0) continue;
          da(h, l) = dn(h, l) / y[h];
          row += da(h, l);
        }
        da(h, h) = -row;
      }
      times.push_back(t);
      increments.push_back(std::move(da));
      est.at_risk.push_back(y);
      est.counts.push_back(dn);
      for (int h = 0; h < k; ++h) {
        for (int l = 0; l < k; ++l) {
          y[h] -= dn(h, l);
          y[l] += dn(h, l);
        }
      }
    }
    for (; j < events.size() && events[j].time == t; ++j) {
      if (events[j].to == -1) y[events[j].from] -= 1.0;
    }
    i = j;
  }
  if (times.empty()) {
    est.hazard = MatrixStepFunction(k);
  } else {
    est.hazard = MatrixStepFunction(std::move(times), std::move(increments));
  }
  return est;
}

CompleteObservationCheck aj_complete_observation_check(const MultiStateHistory& history,
                                                       double tolerance) {
  return aj_complete_observation_check(history, aalen_johansen(history), tolerance);
}

CompleteObservationCheck aj_complete_observation_check(const MultiStateHistory& history,
                                                       const TransitionEstimate& estimate,
                                                       double tolerance) {
  if (history.censored()) {
    throw DomainError("complete-observation identity needs an uncensored history");
  }
  const auto& times = estimate.hazard.jump_times();
  const auto& inc = estimate.hazard.increments();
  const int k = history.states();
  // occupancy just after each jump time, straight from the paths
  std::vector<Eigen::RowVectorXd> occupancy;
  occupancy.push_back(initial_counts(history).transpose());
  for (double t : times) {
    Eigen::RowVectorXd y = Eigen::RowVectorXd::Zero(k);
    for (const auto& path : history.subjects()) y[path.state_at(t)] += 1.0;
    occupancy.push_back(std::move(y));
  }
  const double n = std::max<double>(1.0, static_cast<double>(history.size()));
  CompleteObservationCheck out;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
  for (std::size_t a = 0; a < occupancy.size(); ++a) {
    Eigen::RowVectorXd carried = occupancy[a];
    for (std::size_t b = a; b < times.size(); ++b) {
      carried = carried * (eye + inc[b]);
      const double dev = (carried - occupancy[b + 1]).cwiseAbs().maxCoeff() / n;
      out.max_deviation = std::max(out.max_deviation, dev);
    }
  }
  out.pass = out.max_deviation <= tolerance;
  return out;
}

Eigen::MatrixXd aj_covariance(const TransitionEstimate& estimate, double s, double t) {
  if (s > t) throw DomainError("covariance needs s <= t");
  const int k = estimate.states;
  const Eigen::Index kk = static_cast<Eigen::Index>(k) * k;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(kk, kk);
  const auto& times = estimate.hazard.jump_times();
  const auto& inc = estimate.hazard.increments();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
  // right factors P̂(u, t) for every jump u in (s, t], built backwards
  std::vector<std::size_t> idx;
  for (std::size_t m = 0; m < times.size(); ++m) {
    if (times[m] > s && times[m] <= t) idx.push_back(m);
  }
  std::vector<Eigen::MatrixXd> right(idx.size());
  Eigen::MatrixXd acc = eye;
  for (std::size_t r = idx.size(); r-- > 0;) {
    right[r] = acc;  // P̂(u, t) excludes the jump at u itself
    acc = (eye + inc[idx[r]]) * acc;
  }
  Eigen::MatrixXd left = eye;  // P̂(s, u-)
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const std::size_t m = idx[r];
    const auto& y = estimate.at_risk[m];
    const auto& dn = estimate.counts[m];
    // Cov(vec dÂ): block per origin state h over destination columns
    Eigen::MatrixXd cov_da = Eigen::MatrixXd::Zero(kk, kk);
    for (int h = 0; h < k; ++h) {
      if (y[h] == 0.0) continue;
      const double y3 = y[h] * y[h] * y[h];
      Eigen::MatrixXd off = Eigen::MatrixXd::Zero(k, k);
      for (int j = 0; j < k; ++j) {
        if (j == h) continue;
        for (int l = 0; l < k; ++l) {
          if (l == h) continue;
          off(j, l) = dn(h, j) * ((j == l ? y[h] : 0.0) - dn(h, l)) / y3;
        }
      }
      // the diagonal entry is minus the off-diagonal row sum
      Eigen::MatrixXd map = eye;
      map.row(h).setConstant(-1.0);
      map(h, h) = 0.0;
      const Eigen::MatrixXd row_cov = map * off * map.transpose();
      for (int j = 0; j < k; ++j) {
        for (int l = 0; l < k; ++l) {
          cov_da(h + j * k, h + l * k) = row_cov(j, l);
        }
      }
    }
    // vec(L dÂ R) = (Rᵀ ⊗ L) vec(dÂ)
    Eigen::MatrixXd kron(kk, kk);
    const Eigen::MatrixXd rt = right[r].transpose();
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) kron.block(a * k, b * k, k, k) = rt(a, b) * left;
    }
    cov.noalias() += kron * cov_da * kron.transpose();
    left = left * (eye + inc[m]);
  }
  return 0.5 * (cov + cov.transpose());
}

CIFEstimate competing_risks_cif(const RightCensoredSample& sample) {
  if (!sample.has_causes()) {
    if (sample.event_count() > 0) throw ValidationError("events need cause labels");
  }
  CIFEstimate out;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample.event(i)) out.causes.push_back(sample.causes()[i]);
  }
  std::sort(out.causes.begin(), out.causes.end());
  out.causes.erase(std::unique(out.causes.begin(), out.causes.end()), out.causes.end());
  const auto km = kaplan_meier(sample);
  out.overall_survival = km.estimate;

  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sample.time(a) < sample.time(b); });
  const std::size_t nc = out.causes.size();
  std::vector<std::vector<double>> jumps(nc);
  std::vector<double> jt;
  double remaining = static_cast<double>(sample.size());
  std::size_t k = 0;
  while (k < order.size()) {
    const double t = sample.time(order[k]);
    std::vector<double> d(nc, 0.0);
    double gone = 0.0;
    for (; k < order.size() && sample.time(order[k]) == t; ++k) {
      const auto i = order[k];
      if (sample.event(i)) {
        const auto c = std::lower_bound(out.causes.begin(), out.causes.end(), sample.causes()[i]) -
                       out.causes.begin();
        d[static_cast<std::size_t>(c)] += 1.0;
      }
      gone += 1.0;
    }
    const double surv_before = km.estimate.left_limit(t);
    bool any = false;
    for (double x : d) any = any || x > 0.0;
    if (any) {
      jt.push_back(t);
      for (std::size_t c = 0; c < nc; ++c) jumps[c].push_back(surv_before * d[c] / remaining);
    }
    remaining -= gone;
  }
  for (std::size_t c = 0; c < nc; ++c) {
    out.incidence.push_back(StepFunction::from_jumps(jt, std::move(jumps[c])));
  }
  return out;
}

double ExcessMortality::integral(double t) const {
  if (grid.empty() || t <= grid.front()) return 0.0;
  if (t >= grid.back()) return expected.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const auto k = static_cast<std::size_t>(it - grid.begin());
  const double w = (t - grid[k - 1]) / (grid[k] - grid[k - 1]);
  return expected[k - 1] + w * (expected[k] - expected[k - 1]);
}

double ExcessMortality::gamma(double t) const { return discrete.value(t) - integral(t); }

double ExcessMortality::corrected_survival(double t) const {
  return product_integral(discrete, t) * std::exp(integral(t));
}

ExcessMortality excess_mortality(const RightCensoredSample& sample,
                                 const std::vector<PopulationHazard>& mu, double step) {
  if (!(step > 0.0)) throw DomainError("quadrature step must be positive");
  if (mu.size() != sample.size()) {
    throw ValidationError("need one population hazard per subject");
  }
  ExcessMortality out;
  out.discrete = nelson_aalen(sample).estimate;
  const double last = sample.time().maxCoeff();
  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::ceil(last / step));
  for (std::size_t k = 0; k <= steps; ++k) grid.push_back(std::min(last, k * step));
  for (std::size_t i = 0; i < sample.size(); ++i) grid.push_back(sample.time(i));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  // Y^μ(s)/Y(s) is the mean of μ_i(s) over the risk set {time_i >= s}; on a
  // cell (g_k, g_{k+1}] the risk set is fixed
  auto mean_mu = [&](double s, double risk_from) {
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (sample.time(i) < risk_from) continue;
      const double m = mu[i](s);
      if (m < 0.0 || std::isnan(m)) throw DomainError("population hazard must be nonnegative");
      sum += m;
      count += 1.0;
    }
    return count > 0.0 ? sum / count : 0.0;
  };
  out.grid = grid;
  out.expected.assign(grid.size(), 0.0);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double a = grid[k - 1];
    const double b = grid[k];
    const double cell = 0.5 * (b - a) * (mean_mu(a, b) + mean_mu(b, b));
    out.expected[k] = out.expected[k - 1] + cell;
  }
  return out;
}

}  // namespace hazardforge
