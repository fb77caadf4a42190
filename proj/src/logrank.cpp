#include "hazardforge/logrank.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hazardforge/distributions.hpp"
#include "hazardforge/errors.hpp"

namespace hazardforge {
namespace {

void check_weight(const WeightSpec& w) {
  if (w.kind == WeightKind::fleming_harrington && !(w.rho >= 0.0)) {
    throw DomainError("Fleming-Harrington rho must be nonnegative");
  }
  if (!(w.scale > 0.0)) throw DomainError("weight scale must be positive");
}

// Z_h and their covariance for one set of records.
struct Accumulated {
  std::vector<int> labels;
  Eigen::VectorXd observed;
  Eigen::VectorXd expected;
  Eigen::VectorXd score;
  Eigen::MatrixXd variance;
};

Accumulated accumulate(const RightCensoredSample& sample, std::span<const std::size_t> rows,
                       const std::vector<int>& labels, const WeightSpec& weight, double t_max) {
  const auto k = static_cast<Eigen::Index>(labels.size());
  Accumulated acc;
  acc.labels = labels;
  acc.observed = Eigen::VectorXd::Zero(k);
  acc.expected = Eigen::VectorXd::Zero(k);
  acc.score = Eigen::VectorXd::Zero(k);
  acc.variance = Eigen::MatrixXd::Zero(k, k);

  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sample.time(a) < sample.time(b); });
  auto group_of = [&](std::size_t i) {
    return static_cast<Eigen::Index>(
        std::lower_bound(labels.begin(), labels.end(), sample.groups()[i]) - labels.begin());
  };
  Eigen::VectorXd at_risk = Eigen::VectorXd::Zero(k);
  for (auto i : order) at_risk[group_of(i)] += 1.0;
  double pooled_na = 0.0;  // Â(t−) of the pooled sample, for the FH weight

  std::size_t pos = 0;
  while (pos < order.size()) {
    const double t = sample.time(order[pos]);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd leaving = Eigen::VectorXd::Zero(k);
    for (; pos < order.size() && sample.time(order[pos]) == t; ++pos) {
      const auto g = group_of(order[pos]);
      if (sample.event(order[pos])) d[g] += 1.0;
      leaving[g] += 1.0;
    }
    const double dt = d.sum();
    const double r = at_risk.sum();
    if (dt > 0.0 && t <= t_max) {
      double w = 1.0;
      switch (weight.kind) {
        case WeightKind::logrank:
          break;
        case WeightKind::wilcoxon:
          w = r;
          break;
        case WeightKind::fleming_harrington:
          w = std::pow(std::exp(-pooled_na), weight.rho);
          break;
      }
      w *= weight.scale;
      const Eigen::VectorXd frac = at_risk / r;
      const double tie = r > 1.0 ? (r - dt) / (r - 1.0) : 1.0;
      acc.observed += d;
      acc.expected += frac * dt;
      acc.score += w * (d - frac * dt);
      const Eigen::MatrixXd v =
          Eigen::MatrixXd(frac.asDiagonal()) - frac * frac.transpose();
      acc.variance += (w * w * dt * tie) * v;
    }
    if (dt > 0.0) pooled_na += dt / r;
    at_risk -= leaving;
  }
  return acc;
}

// Moore-Penrose inverse of a symmetric PSD matrix with a relative cutoff.
std::pair<Eigen::MatrixXd, int> pseudo_inverse(const Eigen::MatrixXd& v) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (top > 0.0 && ev[i] > 1e-10 * top) {
      inv[i] = 1.0 / ev[i];
      ++rank;
    }
  }
  return {eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose(), rank};
}

TestResult finish(const Accumulated& acc) {
  TestResult out;
  out.groups = acc.labels;
  out.observed = acc.observed;
  out.expected = acc.expected;
  out.score = acc.score;
  out.variance = acc.variance;
  const auto k = static_cast<Eigen::Index>(acc.labels.size());
  // zero variance with zero score is a test with no information: X² = 0
  if (acc.variance.isZero(0.0) && acc.score.isZero(0.0)) {
    out.statistic = 0.0;
    out.df = static_cast<int>(k) - 1;
    if (k == 2) out.z = 0.0;
    out.p_value = 1.0;
    out.warnings.push_back("variance is zero; statistic set to 0");
    return out;
  }
  if (k == 2) {
    const double v = acc.variance(0, 0);
    if (!(v > 0.0)) throw DegenerateTestError("log-rank variance is zero");
    out.statistic = acc.score[0] * acc.score[0] / v;
    out.z = acc.score[0] / std::sqrt(v);
    out.df = 1;
  } else {
    const Eigen::VectorXd z = acc.score.head(k - 1);
    auto [ginv, rank] = pseudo_inverse(acc.variance.topLeftCorner(k - 1, k - 1));
    if (rank == 0) throw DegenerateTestError("log-rank covariance is zero");
    out.statistic = z.dot(ginv * z);
    out.df = rank;
  }
  out.statistic = std::max(0.0, out.statistic);
  out.p_value = chi2_sf(out.statistic, out.df);
  return out;
}

std::vector<std::size_t> all_rows(const RightCensoredSample& s) {
  std::vector<std::size_t> rows(s.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

TestResult one_sample_logrank(const RightCensoredSample& sample, const CumulativeHazard& a0,
                              double t, const WeightSpec& weight) {
  check_weight(weight);
  if (!(t > 0.0)) throw DomainError("test horizon must be positive");
  const auto table = risk_table(sample);
  const double n = table.n;
  const double rho = weight.kind == WeightKind::fleming_harrington ? weight.rho : 0.0;
  // ∫ exp(-c A0) dA0 over (a, b] in closed form
  auto tilted = [](double c, double lo, double hi) {
    if (c == 0.0) return hi - lo;
    return (std::exp(-c * lo) - std::exp(-c * hi)) / c;
  };
  double observed = 0.0;
  double expected = 0.0;  // ∫ Y dA0
  double score = 0.0;
  double var = 0.0;
  double prev_time = 0.0;
  double prev_a0 = a0(0.0);
  for (std::size_t k = 0; k < table.size() && prev_time < t; ++k) {
    // Y(s) = table.at_risk[k] on (prev_time, time_k]
    const double hi_t = std::min(table.time[k], t);
    const double a_hi = a0(hi_t);
    if (a_hi < prev_a0) throw DomainError("reference cumulative hazard must be nondecreasing");
    const double y = table.at_risk[k];
    // K = y·m(y)·S0^rho with m = 1 (log-rank) or y/n (Wilcoxon)
    const double m = weight.kind == WeightKind::wilcoxon ? y / n : 1.0;
    const double kw = weight.scale * y * m;
    expected += y * (a_hi - prev_a0);
    score -= kw * tilted(rho, prev_a0, a_hi);
    var += kw * kw / y * tilted(2.0 * rho, prev_a0, a_hi);
    if (table.time[k] <= t && table.events[k] > 0.0) {
      observed += table.events[k];
      score += kw / y * std::exp(-rho * a_hi) * table.events[k];
    }
    prev_time = hi_t;
    prev_a0 = a_hi;
  }
  if (!(expected > 0.0) || !(var > 0.0)) {
    throw DegenerateTestError("expected number of events is zero");
  }
  TestResult out;
  out.statistic = score * score / var;
  out.z = score / std::sqrt(var);
  out.df = 1;
  out.p_value = chi2_sf(out.statistic, 1);
  out.observed = Eigen::VectorXd::Constant(1, observed);
  out.expected = Eigen::VectorXd::Constant(1, expected);
  out.score = Eigen::VectorXd::Constant(1, score);
  out.variance = Eigen::MatrixXd::Constant(1, 1, var);
  out.smr = observed / expected;
  return out;
}

TestResult k_sample_logrank(const RightCensoredSample& sample, const WeightSpec& weight,
                            double t) {
  check_weight(weight);
  if (!sample.has_groups()) throw DomainError("k-sample test needs group labels");
  const auto labels = sample.group_labels();
  if (labels.size() < 2) throw DomainError("k-sample test needs at least two groups");
  const auto rows = all_rows(sample);
  return finish(accumulate(sample, rows, labels, weight, t));
}

TestResult stratified_logrank(const RightCensoredSample& sample, const WeightSpec& weight,
                              double t) {
  check_weight(weight);
  if (!sample.has_groups()) throw DomainError("stratified test needs group labels");
  const auto labels = sample.group_labels();
  if (labels.size() != 2) throw DomainError("stratified test needs exactly two groups");
  std::map<int, std::vector<std::size_t>> by_stratum;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    by_stratum[sample.has_strata() ? sample.strata()[i] : 0].push_back(i);
  }
  Accumulated total;
  total.labels = labels;
  total.observed = Eigen::VectorXd::Zero(2);
  total.expected = Eigen::VectorXd::Zero(2);
  total.score = Eigen::VectorXd::Zero(2);
  total.variance = Eigen::MatrixXd::Zero(2, 2);
  std::vector<std::string> warnings;
  int used = 0;
  for (const auto& [stratum, rows] : by_stratum) {
    const auto part = accumulate(sample, rows, labels, weight, t);
    if (!(part.variance(0, 0) > 0.0)) {
      warnings.push_back("stratum " + std::to_string(stratum) + " has no information; skipped");
      continue;
    }
    total.observed += part.observed;
    total.expected += part.expected;
    total.score += part.score;
    total.variance += part.variance;
    ++used;
  }
  if (used == 0) throw DegenerateTestError("every stratum is degenerate");
  auto out = finish(total);
  out.warnings = std::move(warnings);
  return out;
}

}  // namespace hazardforge
