#include "hazardforge/samples.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hazardforge/errors.hpp"

namespace hazardforge {
namespace {

void check_labels(const std::vector<int>& labels, std::size_t n, const char* what) {
  if (!labels.empty() && labels.size() != n) {
    throw ValidationError(std::string(what) + " labels must have one entry per record");
  }
}

template <class T>
std::vector<T> pick(const std::vector<T>& v, std::span<const std::size_t> rows) {
  if (v.empty()) return {};
  std::vector<T> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(v[r]);
  return out;
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

RightCensoredSample::RightCensoredSample(Eigen::VectorXd time, Eigen::VectorXi status,
                                         Eigen::MatrixXd covariates, std::vector<int> group,
                                         std::vector<int> strata, std::vector<int> cause)
    : time_(std::move(time)),
      status_(std::move(status)),
      covariates_(std::move(covariates)),
      group_(std::move(group)),
      strata_(std::move(strata)),
      cause_(std::move(cause)) {
  const auto n = static_cast<std::size_t>(time_.size());
  if (n == 0) throw ValidationError("sample must contain at least one record");
  if (status_.size() != time_.size()) throw ValidationError("time and status lengths differ");
  if (covariates_.size() == 0) covariates_.resize(time_.size(), 0);
  if (covariates_.rows() != time_.size()) {
    throw ValidationError("covariate matrix must have one row per record");
  }
  for (Eigen::Index i = 0; i < time_.size(); ++i) {
    if (!std::isfinite(time_[i]) || time_[i] < 0.0) {
      throw ValidationError("times must be finite and nonnegative (record " +
                            std::to_string(i + 1) + ")");
    }
    if (status_[i] != 0 && status_[i] != 1) {
      throw ValidationError("status must be 0 or 1 (record " + std::to_string(i + 1) + ")");
    }
  }
  if (!covariates_.allFinite()) throw ValidationError("covariates must be finite");
  check_labels(group_, n, "group");
  check_labels(strata_, n, "strata");
  check_labels(cause_, n, "cause");
  if (!cause_.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (event(i) && cause_[i] < 1) {
        throw ValidationError("event without a cause label (record " + std::to_string(i + 1) +
                              ")");
      }
    }
  }
}

std::size_t RightCensoredSample::event_count() const {
  return static_cast<std::size_t>(status_.sum());
}

std::vector<int> RightCensoredSample::group_labels() const { return sorted_unique(group_); }
std::vector<int> RightCensoredSample::stratum_labels() const { return sorted_unique(strata_); }

RightCensoredSample RightCensoredSample::subset(std::span<const std::size_t> rows) const {
  Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXi s(static_cast<Eigen::Index>(rows.size()));
  Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), dim());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(rows[k]);
    const auto kk = static_cast<Eigen::Index>(k);
    t[kk] = time_[r];
    s[kk] = status_[r];
    z.row(kk) = covariates_.row(r);
  }
  return RightCensoredSample(std::move(t), std::move(s), std::move(z), pick(group_, rows),
                             pick(strata_, rows), pick(cause_, rows));
}

RightCensoredSample RightCensoredSample::with_covariates(Eigen::MatrixXd covariates) const {
  return RightCensoredSample(time_, status_, std::move(covariates), group_, strata_, cause_);
}

RightCensoredSample RightCensoredSample::with_groups(std::vector<int> group) const {
  return RightCensoredSample(time_, status_, covariates_, std::move(group), strata_, cause_);
}

IntervalCensoredSample::IntervalCensoredSample(std::vector<double> left, std::vector<double> right)
    : left_(std::move(left)), right_(std::move(right)) {
  if (left_.empty()) throw ValidationError("sample must contain at least one record");
  if (left_.size() != right_.size()) throw ValidationError("left and right lengths differ");
  for (std::size_t i = 0; i < left_.size(); ++i) {
    if (!std::isfinite(left_[i]) || left_[i] < 0.0) {
      throw ValidationError("left endpoints must be finite and nonnegative (record " +
                            std::to_string(i + 1) + ")");
    }
    if (std::isnan(right_[i]) || left_[i] > right_[i]) {
      throw ValidationError("left endpoint exceeds right endpoint (record " +
                            std::to_string(i + 1) + ")");
    }
  }
}

int SubjectPath::state_at(double t) const {
  int state = initial_state;
  for (const auto& tr : transitions) {
    if (tr.time > t) break;
    state = tr.to;
  }
  return state;
}

MultiStateHistory::MultiStateHistory(int states, std::vector<SubjectPath> subjects)
    : states_(states), subjects_(std::move(subjects)) {
  if (states_ < 1) throw ValidationError("state space must be nonempty");
  for (std::size_t s = 0; s < subjects_.size(); ++s) {
    const auto& path = subjects_[s];
    const std::string who = " (subject " + std::to_string(s + 1) + ")";
    auto in_range = [&](int x) { return x >= 0 && x < states_; };
    if (!in_range(path.initial_state)) throw ValidationError("initial state out of range" + who);
    int current = path.initial_state;
    double last = -kInf;
    for (const auto& tr : path.transitions) {
      if (!std::isfinite(tr.time) || tr.time < 0.0) {
        throw ValidationError("transition times must be finite and nonnegative" + who);
      }
      if (!(tr.time > last)) throw ValidationError("transition times must increase" + who);
      if (!in_range(tr.from) || !in_range(tr.to)) {
        throw ValidationError("transition state out of range" + who);
      }
      if (tr.from == tr.to) throw ValidationError("transition must change state" + who);
      if (tr.from != current) throw ValidationError("transitions do not chain" + who);
      current = tr.to;
      last = tr.time;
    }
    if (path.censor_time) {
      if (std::isnan(*path.censor_time) || *path.censor_time < 0.0) {
        throw ValidationError("censoring time must be nonnegative" + who);
      }
      if (!path.transitions.empty() && path.transitions.back().time > *path.censor_time) {
        throw ValidationError("transition after censoring time" + who);
      }
    }
  }
}

bool MultiStateHistory::censored() const {
  return std::any_of(subjects_.begin(), subjects_.end(),
                     [](const SubjectPath& p) { return p.censor_time.has_value(); });
}

BivariateSample::BivariateSample(std::vector<double> t1_, std::vector<double> t2_,
                                 std::vector<int> d1_, std::vector<int> d2_)
    : t1(std::move(t1_)), t2(std::move(t2_)), d1(std::move(d1_)), d2(std::move(d2_)) {
  if (t1.empty()) throw ValidationError("sample must contain at least one pair");
  if (t2.size() != t1.size() || d1.size() != t1.size() || d2.size() != t1.size()) {
    throw ValidationError("bivariate columns differ in length");
  }
  for (std::size_t i = 0; i < t1.size(); ++i) {
    if (!std::isfinite(t1[i]) || !std::isfinite(t2[i]) || t1[i] < 0.0 || t2[i] < 0.0) {
      throw ValidationError("bivariate times must be finite and nonnegative");
    }
    if ((d1[i] != 0 && d1[i] != 1) || (d2[i] != 0 && d2[i] != 1)) {
      throw ValidationError("bivariate status must be 0 or 1");
    }
  }
}

RiskTable risk_table(std::span<const double> times, std::span<const int> status) {
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  RiskTable table;
  table.n = static_cast<double>(times.size());
  double remaining = table.n;
  std::size_t k = 0;
  while (k < order.size()) {
    const double t = times[order[k]];
    double d = 0.0;
    double c = 0.0;
    while (k < order.size() && times[order[k]] == t) {
      (status[order[k]] == 1 ? d : c) += 1.0;
      ++k;
    }
    table.time.push_back(t);
    table.events.push_back(d);
    table.censored.push_back(c);
    table.at_risk.push_back(remaining);
    remaining -= d + c;
  }
  return table;
}

RiskTable risk_table(const RightCensoredSample& sample) {
  std::vector<int> status(sample.status().begin(), sample.status().end());
  return risk_table(std::span<const double>(sample.time().data(), sample.size()), status);
}

CountingProcess counting_and_risk(const RightCensoredSample& sample, std::optional<int> group) {
  std::vector<double> times;
  std::vector<int> status;
  if (group) {
    if (!sample.has_groups()) throw DomainError("sample has no group labels");
    const auto labels = sample.group_labels();
    if (!std::binary_search(labels.begin(), labels.end(), *group)) {
      throw DomainError("unknown group label " + std::to_string(*group));
    }
  }
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (group && sample.groups()[i] != *group) continue;
    times.push_back(sample.time(i));
    status.push_back(sample.event(i) ? 1 : 0);
  }
  const auto table = risk_table(times, status);
  std::vector<double> event_jumps(table.size());
  std::vector<double> leave_jumps(table.size());
  for (std::size_t k = 0; k < table.size(); ++k) {
    event_jumps[k] = table.events[k];
    leave_jumps[k] = -(table.events[k] + table.censored[k]);
  }
  return {StepFunction::from_jumps(table.time, std::move(event_jumps), 0.0),
          StepFunction::from_jumps(table.time, std::move(leave_jumps), table.n)};
}

}  // namespace hazardforge
