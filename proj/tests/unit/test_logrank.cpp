#include <doctest.h>

#include <cmath>

#include "hazardforge/distributions.hpp"
#include "hazardforge/errors.hpp"
#include "hazardforge/logrank.hpp"
#include "hazardforge/rng.hpp"
#include "hazardforge/simlab.hpp"
#include "oracles.hpp"

using namespace hazardforge;
using oracle::sample;

namespace {

RightCensoredSample two_groups(std::size_t n, std::uint64_t seed, double hr = 1.0) {
  SimConfig c;
  c.n = n;
  c.seed = seed;
  c.covariates.kind = CovariateLaw::Kind::bernoulli;
  c.censor.kind = CensorLaw::Kind::exponential;
  c.censor.rate = 0.43;  // about 30% censoring
  if (hr != 1.0) {
    c.model.kind = ModelSpec::Kind::cox;
    c.model.beta = Eigen::VectorXd::Constant(1, std::log(hr));
  }
  return simulate_right_censored(c);
}

}  // namespace

TEST_CASE("one-sample log-rank") {
  // N(t) = E(t): three events under A0(t) = t with Y integrating to 3
  const auto s = sample({1.0, 1.0, 1.0}, {1, 1, 1});
  const auto r = one_sample_logrank(s, [](double t) { return t; }, 2.0);
  CHECK(r.statistic == doctest::Approx(0.0));
  REQUIRE(r.smr);
  CHECK(*r.smr == doctest::Approx(1.0));

  const auto big = two_groups(80, 5);
  const auto r1 = one_sample_logrank(big, [](double t) { return t; }, 1.5);
  const auto r2 = one_sample_logrank(big, [](double t) { return 2.0 * t; }, 1.5);
  CHECK(r2.expected[0] == 2.0 * r1.expected[0]);
  CHECK_THROWS_AS(one_sample_logrank(big, [](double) { return 0.0; }, 1.0), DegenerateTestError);

  int rejections = 0;
  const int reps = 2000;
  for (int k = 0; k < reps; ++k) {
    const auto rep = two_groups(100, stream_seed(71, static_cast<std::uint64_t>(k)));
    rejections += one_sample_logrank(rep, [](double t) { return t; }, 2.0).p_value < 0.05;
  }
  const double rate = rejections / static_cast<double>(reps);
  CHECK(rate >= 0.03);
  CHECK(rate <= 0.07);
}

TEST_CASE("two-sample fixtures against the enumeration oracle") {
  const auto s = sample({1, 2, 3, 4}, {1, 1, 1, 1}, {0, 0, 1, 1});
  const auto r = k_sample_logrank(s);
  CHECK(r.observed[0] == 2.0);
  // E_A = 2/4 + 1/3 = 5/6
  CHECK(std::abs(r.expected[0] - 5.0 / 6.0) <= 1e-15);
  const auto [z, v] = oracle::logrank_two_sample(s, 0, [](double, double) { return 1.0; });
  CHECK(std::abs(r.score[0] - z) <= 1e-12);
  CHECK(std::abs(r.variance(0, 0) - v) <= 1e-12);

  const auto same = sample({2, 2}, {1, 1}, {0, 1});
  const auto rs = k_sample_logrank(same);
  CHECK(rs.score[0] == 0.0);
  CHECK(rs.statistic == 0.0);
}

TEST_CASE("weights match the oracle with ties") {
  const auto base = two_groups(120, 9, 1.5);
  // round times to create ties
  Eigen::VectorXd t = (base.time().array() * 10.0).round() / 10.0 + 0.1;
  const RightCensoredSample s(t, base.status(), Eigen::MatrixXd(), base.groups());
  const double n = static_cast<double>(s.size());
  WeightSpec lr;
  WeightSpec wil{WeightKind::wilcoxon, 0.0, 1.0};
  WeightSpec fh{WeightKind::fleming_harrington, 1.5, 1.0};
  const auto r_lr = k_sample_logrank(s, lr);
  const auto r_w = k_sample_logrank(s, wil);
  const auto r_fh = k_sample_logrank(s, fh);
  const auto o_lr = oracle::logrank_two_sample(s, 1, [](double, double) { return 1.0; });
  const auto o_w = oracle::logrank_two_sample(s, 1, [](double r, double) { return r; });
  const auto o_fh = oracle::logrank_two_sample(
      s, 1, [](double, double a) { return std::pow(std::exp(-a), 1.5); });
  CHECK(std::abs(r_lr.statistic - o_lr.first * o_lr.first / o_lr.second) <= 1e-10);
  CHECK(std::abs(r_w.statistic - o_w.first * o_w.first / o_w.second) <= 1e-10);
  CHECK(std::abs(r_fh.statistic - o_fh.first * o_fh.first / o_fh.second) <= 1e-10);
  (void)n;
}

TEST_CASE("log-rank invariants") {
  const auto s = two_groups(200, 14, 1.3);
  const auto r = k_sample_logrank(s);
  CHECK(r.score[0] == -r.score[1]);
  CHECK(std::abs(r.observed.sum() - r.expected.sum()) <= 1e-10);
  CHECK(r.p_value >= 0.0);
  CHECK(r.p_value <= 1.0);

  WeightSpec scaled;
  scaled.scale = 3.7;
  CHECK(std::abs(k_sample_logrank(s, scaled).statistic - r.statistic) <= 1e-10 * r.statistic);

  WeightSpec fh0{WeightKind::fleming_harrington, 0.0, 1.0};
  CHECK(k_sample_logrank(s, fh0).statistic == r.statistic);

  CHECK_THROWS_AS(k_sample_logrank(sample({1, 2}, {1, 1}, {0, 0})), DomainError);
}

TEST_CASE("k-sample with three groups") {
  SimConfig c;
  c.n = 300;
  c.seed = 44;
  const auto base = simulate_right_censored(c);
  std::vector<int> g(base.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<int>(i % 3);
  const auto s = base.with_groups(g);
  const auto r = k_sample_logrank(s);
  CHECK(r.df == 2);
  CHECK(r.groups.size() == 3);
  CHECK(std::abs(r.score.sum()) <= 1e-10);
  CHECK(r.p_value == doctest::Approx(chi2_sf(r.statistic, 2)));
}

TEST_CASE("stratified log-rank") {
  const auto s = two_groups(150, 3, 1.4);
  const std::vector<int> one(s.size(), 0);
  const RightCensoredSample single(s.time(), s.status(), Eigen::MatrixXd(), s.groups(), one);
  CHECK(std::abs(stratified_logrank(single).statistic - k_sample_logrank(s).statistic) <= 1e-12);

  // mirror strata: same records, labels swapped
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd t(2 * n);
  t << s.time(), s.time();
  Eigen::VectorXi d(2 * n);
  d << s.status(), s.status();
  std::vector<int> g = s.groups();
  std::vector<int> strata(s.size(), 0);
  for (int x : s.groups()) g.push_back(1 - x);
  strata.resize(2 * s.size(), 1);
  const RightCensoredSample mirror(t, d, Eigen::MatrixXd(), g, strata);
  const auto rm = stratified_logrank(mirror);
  CHECK(std::abs(rm.score[0]) <= 1e-10);
  CHECK(rm.statistic <= 1e-20);

  int rejections = 0;
  const int reps = 2000;
  for (int k = 0; k < reps; ++k) {
    std::vector<Eigen::VectorXd> times;
    Eigen::VectorXd tt(150);
    Eigen::VectorXi dd(150);
    std::vector<int> gg;
    std::vector<int> ss;
    for (int stratum = 0; stratum < 3; ++stratum) {
      SimConfig c;
      c.n = 50;
      c.seed = stream_seed(500 + stratum, static_cast<std::uint64_t>(k));
      c.event.rate = 0.5 * (stratum + 1);
      c.covariates.kind = CovariateLaw::Kind::bernoulli;
      c.censor.kind = CensorLaw::Kind::exponential;
      c.censor.rate = 0.3;
      const auto part = simulate_right_censored(c);
      tt.segment(50 * stratum, 50) = part.time();
      dd.segment(50 * stratum, 50) = part.status();
      gg.insert(gg.end(), part.groups().begin(), part.groups().end());
      ss.insert(ss.end(), 50, stratum);
    }
    try {
      rejections += stratified_logrank(RightCensoredSample(tt, dd, Eigen::MatrixXd(), gg, ss))
                        .p_value < 0.05;
    } catch (const Error&) {
    }
  }
  const double rate = rejections / static_cast<double>(reps);
  CHECK(rate >= 0.03);
  CHECK(rate <= 0.07);
}
