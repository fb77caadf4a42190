#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hazardforge/step_function.hpp"

namespace hazardforge {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Right-censored observations (time, status, optional labels, covariates).
///
/// Label vectors (group, strata, cause) are either empty or have one entry
/// per record. Covariates are stored row-per-record; a zero-column matrix
/// means no covariates.
class RightCensoredSample {
 public:
  RightCensoredSample(Eigen::VectorXd time, Eigen::VectorXi status,
                      Eigen::MatrixXd covariates = {}, std::vector<int> group = {},
                      std::vector<int> strata = {}, std::vector<int> cause = {});

  std::size_t size() const noexcept { return static_cast<std::size_t>(time_.size()); }
  Eigen::Index dim() const noexcept { return covariates_.cols(); }

  const Eigen::VectorXd& time() const noexcept { return time_; }
  const Eigen::VectorXi& status() const noexcept { return status_; }
  const Eigen::MatrixXd& covariates() const noexcept { return covariates_; }
  double time(std::size_t i) const { return time_[static_cast<Eigen::Index>(i)]; }
  bool event(std::size_t i) const { return status_[static_cast<Eigen::Index>(i)] == 1; }

  bool has_groups() const noexcept { return !group_.empty(); }
  bool has_strata() const noexcept { return !strata_.empty(); }
  bool has_causes() const noexcept { return !cause_.empty(); }
  const std::vector<int>& groups() const noexcept { return group_; }
  const std::vector<int>& strata() const noexcept { return strata_; }
  const std::vector<int>& causes() const noexcept { return cause_; }

  std::size_t event_count() const;

  /// Sorted distinct group labels.
  std::vector<int> group_labels() const;
  std::vector<int> stratum_labels() const;

  RightCensoredSample subset(std::span<const std::size_t> rows) const;
  RightCensoredSample with_covariates(Eigen::MatrixXd covariates) const;
  RightCensoredSample with_groups(std::vector<int> group) const;

 private:
  Eigen::VectorXd time_;
  Eigen::VectorXi status_;
  Eigen::MatrixXd covariates_;
  std::vector<int> group_;
  std::vector<int> strata_;
  std::vector<int> cause_;
};

/// Interval-censored observations (left, right]; right may be +inf and
/// left == right marks an exact observation.
class IntervalCensoredSample {
 public:
  IntervalCensoredSample(std::vector<double> left, std::vector<double> right);

  std::size_t size() const noexcept { return left_.size(); }
  const std::vector<double>& left() const noexcept { return left_; }
  const std::vector<double>& right() const noexcept { return right_; }
  bool exact(std::size_t i) const { return left_[i] == right_[i]; }

 private:
  std::vector<double> left_;
  std::vector<double> right_;
};

struct Transition {
  double time;
  int from;
  int to;
};

struct SubjectPath {
  int initial_state = 0;
  std::vector<Transition> transitions;
  std::optional<double> censor_time;

  /// State occupied at time t (right-continuous).
  int state_at(double t) const;
  /// Under observation just before t (events-first convention at ties).
  bool observed_at(double t) const { return !censor_time || t <= *censor_time; }
};

/// Per-subject transition histories over states {0, ..., k-1}.
class MultiStateHistory {
 public:
  MultiStateHistory(int states, std::vector<SubjectPath> subjects);

  int states() const noexcept { return states_; }
  std::size_t size() const noexcept { return subjects_.size(); }
  const std::vector<SubjectPath>& subjects() const noexcept { return subjects_; }
  bool censored() const;

 private:
  int states_;
  std::vector<SubjectPath> subjects_;
};

/// Paired right-censored times (T1, T2, d1, d2).
struct BivariateSample {
  BivariateSample(std::vector<double> t1, std::vector<double> t2, std::vector<int> d1,
                  std::vector<int> d2);

  std::size_t size() const noexcept { return t1.size(); }

  std::vector<double> t1;
  std::vector<double> t2;
  std::vector<int> d1;
  std::vector<int> d2;
};

/// Distinct-time risk summary. Ties: events and censorings at the same time
/// share a row; the censored subjects are still at risk at that time.
struct RiskTable {
  std::vector<double> time;    // distinct observed times, increasing
  std::vector<double> events;  // events at time
  std::vector<double> censored;
  std::vector<double> at_risk;  // #{i : time_i >= time}
  double n = 0.0;

  std::size_t size() const noexcept { return time.size(); }
};

RiskTable risk_table(const RightCensoredSample& sample);
RiskTable risk_table(std::span<const double> times, std::span<const int> status);

/// N(t) and the right-continuous survivor count R(t) = #{i : time_i > t}.
/// The at-risk process is Y(t) = R(t-).
struct CountingProcess {
  StepFunction events;
  StepFunction remaining;

  double at_risk(double t) const { return remaining.left_limit(t); }
};

CountingProcess counting_and_risk(const RightCensoredSample& sample,
                                  std::optional<int> group = std::nullopt);

}  // namespace hazardforge
