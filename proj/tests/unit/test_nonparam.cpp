#include <doctest.h>

#include <cmath>

#include "hazardforge/bands.hpp"
#include "hazardforge/dabrowska.hpp"
#include "hazardforge/distributions.hpp"
#include "hazardforge/errors.hpp"
#include "hazardforge/nonparam.hpp"
#include "hazardforge/product_integral.hpp"
#include "hazardforge/rng.hpp"
#include "hazardforge/simlab.hpp"
#include "oracles.hpp"

using namespace hazardforge;
using oracle::sample;

namespace {

RightCensoredSample simulated(std::size_t n, std::uint64_t seed, double censor_rate = 0.5) {
  SimConfig c;
  c.n = n;
  c.seed = seed;
  c.censor.kind = CensorLaw::Kind::exponential;
  c.censor.rate = censor_rate;
  return simulate_right_censored(c);
}

}  // namespace

TEST_CASE("Nelson-Aalen hand example and reductions") {
  const auto na = nelson_aalen(sample({1, 2, 3}, {0, 1, 1}));
  CHECK(na.estimate(3.0) == 1.5);
  CHECK(na.variance(3.0) == 1.25);
  CHECK(na.estimate(1.5) == 0.0);

  const auto none = nelson_aalen(sample({1, 2}, {0, 0}));
  CHECK(none.estimate.empty());
  CHECK(none.variance(5.0) == 0.0);

  std::vector<double> t = {0.3, 1.7, 0.9, 2.2, 1.1};
  const auto unc = nelson_aalen(sample(t, {1, 1, 1, 1, 1}));
  std::sort(t.begin(), t.end());
  double expected = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    expected += 1.0 / static_cast<double>(t.size() - i);
    CHECK(unc.estimate(t[i]) == expected);
  }
}

TEST_CASE("Kaplan-Meier hand example and Greenwood") {
  const auto km = kaplan_meier(sample({1, 2, 3}, {0, 1, 1}));
  CHECK(km.estimate(2.0) == 0.5);
  CHECK(km.estimate(3.0) == 0.0);
  CHECK(km.sigma2(2.0) == 0.5);
  CHECK(km.variance(2.0) == 0.125);
  CHECK(std::isinf(km.sigma2(3.0)));
  REQUIRE(km.saturation_time);
  CHECK(*km.saturation_time == 3.0);
  CHECK(km.estimate(100.0) == 0.0);

  CHECK(kaplan_meier(sample({1, 2}, {0, 0})).estimate(10.0) == 1.0);
}

TEST_CASE("KM is the product integral of NA and 1 - ECDF when uncensored") {
  const auto s = simulated(300, 11);
  const auto na = nelson_aalen(s);
  const auto km = kaplan_meier(s);
  for (double t : na.estimate.jump_times()) {
    CHECK(km.estimate(t) == product_integral(na.estimate, t));
  }
  std::vector<double> times = {3, 1, 4, 1, 5, 9, 2, 6};
  const auto unc = kaplan_meier(sample(times, std::vector<int>(times.size(), 1)));
  for (double t : {0.0, 1.0, 1.5, 2.0, 4.0, 6.0, 9.0, 10.0}) {
    CHECK(std::abs(unc.estimate(t) - oracle::ecdf_survival(times, t)) <= 1e-15);
  }
}

TEST_CASE("monotonicity of estimates and variances") {
  const auto s = simulated(200, 5);
  const auto na = nelson_aalen(s);
  const auto km = kaplan_meier(s);
  double prev_a = 0.0;
  double prev_v = 0.0;
  double prev_s = 1.0;
  for (double t : na.estimate.jump_times()) {
    CHECK(na.estimate(t) >= prev_a);
    CHECK(na.variance(t) >= prev_v);
    CHECK(km.estimate(t) <= prev_s);
    prev_a = na.estimate(t);
    prev_v = na.variance(t);
    prev_s = km.estimate(t);
  }
  CHECK(km.estimate(0.0) == 1.0);
}

TEST_CASE("Greenwood and NA variance increments agree to first order") {
  const auto s = simulated(2000, 3);
  const auto na = nelson_aalen(s);
  const auto km = kaplan_meier(s);
  const auto table = risk_table(s);
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double y = table.at_risk[k];
    const double d = table.events[k];
    if (d == 0.0 || y < 10.0 * d) continue;
    const double t = table.time[k];
    const double g = km.sigma2.jump_at(t);
    const double v = na.variance.jump_at(t);
    CHECK(std::abs(g - v) / v <= 0.15);
  }
}

TEST_CASE("bias bound") {
  std::vector<RightCensoredSample> reps = {sample({5.0}, {1}), sample({3.0, 6.0}, {1, 0})};
  CHECK(na_bias_bound(reps, [](double) { return 1.0; }, 2.0) == 0.0);
  CHECK(na_bias_bound(reps, [](double) { return 0.0; }, 10.0) == 0.0);
  CHECK_THROWS_AS(na_bias_bound(reps, [](double) { return -1.0; }, 10.0), DomainError);

  // n = 1, exponential(1): P(Y(s) = 0) = 1 - e^{-s}, so the bound at t = 1 is e^{-1}
  std::vector<RightCensoredSample> singles;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    SimConfig c;
    c.n = 1;
    c.seed = stream_seed(99, r);
    singles.push_back(simulate_right_censored(c));
  }
  CHECK(na_bias_bound(singles, [](double) { return 1.0; }, 1.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(0.02));
}

TEST_CASE("pointwise intervals") {
  const auto lin = pointwise_ci(CurveKind::survival, 0.5, 0.2, 0.95, Transform::linear);
  CHECK(lin.lo == doctest::Approx(0.5 - 1.959964 * 0.1).epsilon(1e-6));
  CHECK(lin.hi == doctest::Approx(0.5 + 1.959964 * 0.1).epsilon(1e-6));
  CHECK(std::round(lin.lo * 1000) == 304);
  CHECK(std::round(lin.hi * 1000) == 696);

  const auto zero = pointwise_ci(CurveKind::survival, 0.7, 0.0, 0.95, Transform::loglog);
  CHECK(zero.lo == doctest::Approx(0.7));
  CHECK(zero.hi == doctest::Approx(0.7));

  for (double s : {0.01, 0.2, 0.5, 0.9, 0.999}) {
    for (double sigma : {0.05, 1.0, 20.0}) {
      const auto ll = pointwise_ci(CurveKind::survival, s, sigma, 0.95, Transform::loglog);
      // interior in exact arithmetic; huge σ underflows to the endpoints
      if (1.96 * sigma / std::abs(std::log(s)) < 5.0) {
        CHECK(ll.lo > 0.0);
        CHECK(ll.hi < 1.0);
      }
      CHECK(ll.lo >= 0.0);
      CHECK(ll.hi <= 1.0);
      CHECK(ll.lo <= s);
      CHECK(ll.hi >= s);
      const auto as = pointwise_ci(CurveKind::survival, s, sigma, 0.95, Transform::arcsin_sqrt);
      CHECK(as.lo >= 0.0);
      CHECK(as.hi <= 1.0);
    }
  }
  CHECK_THROWS_AS(pointwise_ci(CurveKind::survival, 1.0, 0.1, 0.95, Transform::loglog),
                  DomainError);
  CHECK_THROWS_AS(pointwise_ci(CurveKind::survival, 0.0, 0.1, 0.95, Transform::arcsin_sqrt),
                  DomainError);
  const auto km = kaplan_meier(sample({1, 2, 3}, {0, 1, 1}));
  const auto at2 = pointwise_ci(km, 2.0, 0.95, Transform::linear);
  CHECK(at2.lo == 0.0);  // clipped
}

TEST_CASE("band critical values") {
  BandSpec spec;
  spec.type = BandType::hall_wellner;
  spec.mc_reps = 20000;
  spec.grid_points = 500;
  spec.seed = 1;
  const double hw = band_critical_value(spec, 0.0, 1.0);
  CHECK(hw == doctest::Approx(oracle::kolmogorov_quantile(0.95)).epsilon(0.02));
  spec.mc_reps = 4000;
  spec.grid_points = 200;

  spec.conf_level = 0.999;
  const double high = band_critical_value(spec, 0.2, 0.6);
  spec.conf_level = 0.5;
  const double mid = band_critical_value(spec, 0.2, 0.6);
  spec.conf_level = 1e-4;
  const double tiny = band_critical_value(spec, 0.2, 0.6);
  CHECK(high > mid);
  CHECK(mid > tiny);
  CHECK(tiny < 0.3);

  spec.conf_level = 0.95;
  double previous = 0.0;
  for (double c2 : {0.3, 0.4, 0.6, 0.8, 1.0}) {
    const double v = band_critical_value(spec, 0.2, c2);
    CHECK(v >= previous);
    previous = v;
  }
  CHECK_THROWS_AS(band_critical_value(spec, 0.5, 0.5), DomainError);

  // EP uses the standardized bridge; it dominates HW by the factor 2 pathwise
  BandSpec ep = spec;
  ep.type = BandType::equal_precision;
  CHECK(band_critical_value(ep, 0.1, 0.9) >= 2.0 * band_critical_value(spec, 0.1, 0.9));
  CHECK_THROWS_AS(band_critical_value(ep, 0.0, 0.9), DomainError);

  // fixed seed is bitwise deterministic
  CHECK(band_critical_value(spec, 0.1, 0.7) == band_critical_value(spec, 0.1, 0.7));
}

TEST_CASE("simultaneous bands") {
  const auto s = simulated(400, 21);
  const auto km = kaplan_meier(s);
  const auto na = nelson_aalen(s);
  BandSpec spec;
  spec.mc_reps = 5000;
  spec.grid_points = 400;
  spec.seed = 3;
  spec.t_lo = 0.2;
  spec.t_hi = 1.5;
  for (auto type : {BandType::equal_precision, BandType::hall_wellner}) {
    spec.type = type;
    const auto band = simultaneous_band(km, spec);
    REQUIRE(band.times.size() == band.lo.size());
    for (std::size_t k = 0; k < band.times.size(); ++k) {
      const double t = band.times[k];
      const auto ci = pointwise_ci(km, t, 0.95, Transform::linear);
      CHECK(band.hi[k] - band.lo[k] >= ci.hi - ci.lo - 1e-12);
      CHECK(band.lo[k] >= 0.0);
      CHECK(band.hi[k] <= 1.0);
      if (type == BandType::equal_precision && band.lo[k] > 0.0 && band.hi[k] < 1.0) {
        const double half = band.critical_value * km.estimate(t) * std::sqrt(km.sigma2(t));
        CHECK(std::abs(0.5 * (band.hi[k] - band.lo[k]) - half) <= 1e-12);
      }
    }
    const auto nb = simultaneous_band(na, spec);
    CHECK(nb.lo.front() <= na.estimate(spec.t_lo));
  }
  spec.t_lo = 0.0;
  spec.t_hi = 0.001;  // before any event: zero variance
  const auto flat = simultaneous_band(km, spec);
  for (std::size_t k = 0; k < flat.times.size(); ++k) {
    CHECK(flat.lo[k] == km.estimate(flat.times[k]));
    CHECK(flat.hi[k] == km.estimate(flat.times[k]));
  }
  spec.t_lo = 1.0;
  spec.t_hi = 1.0;
  CHECK_THROWS_AS(simultaneous_band(km, spec), DomainError);
}

TEST_CASE("smoothed hazard") {
  const auto one = StepFunction::from_jumps({2.0}, {0.6});
  const std::vector<double> grid = {0.9, 1.0, 1.5, 2.0, 2.9, 3.0, 3.1};
  const auto h = smoothed_hazard(one, 1.0, Kernel::uniform, grid);
  CHECK(h[0] == 0.0);
  for (int k = 1; k <= 5; ++k) CHECK(h[k] == doctest::Approx(0.3));
  CHECK(h[6] == 0.0);

  const auto na = nelson_aalen(simulated(100, 8));
  const double b = 0.3;
  std::vector<double> fine;
  const double lo = -b;
  const double hi = na.estimate.jump_times().back() + b;
  const int m = 20000;
  for (int k = 0; k <= m; ++k) fine.push_back(lo + (hi - lo) * k / m);
  const auto rate = smoothed_hazard(na, b, Kernel::uniform, fine);
  double integral = 0.0;
  for (int k = 0; k < m; ++k) integral += 0.5 * (rate[k] + rate[k + 1]) * (fine[k + 1] - fine[k]);
  CHECK(std::abs(integral - na.estimate.final_value()) <= 1e-3 * na.estimate.final_value() + 1e-3);

  for (double x : smoothed_hazard(StepFunction(), 1.0, Kernel::biweight, grid)) CHECK(x == 0.0);
  CHECK_THROWS_AS(smoothed_hazard(one, 0.0, Kernel::uniform, grid), DomainError);
}

TEST_CASE("survival quantiles") {
  const auto km = kaplan_meier(sample({1, 2, 3}, {0, 1, 1}));
  CHECK(survival_quantile(km, 0.5, 0.95).quantile == 2.0);
  CHECK(survival_quantile(km, 0.01, 0.95).quantile == 2.0);

  const auto tied = kaplan_meier(sample({4, 4, 4, 4}, {1, 1, 1, 1}));
  for (double p : {0.1, 0.5, 0.9}) CHECK(survival_quantile(tied, p, 0.95).quantile == 4.0);

  const auto never = kaplan_meier(sample({1, 2, 3, 4}, {1, 0, 0, 0}));
  CHECK_THROWS_AS(survival_quantile(never, 0.5, 0.95), QuantileUndefinedError);

  const auto big = kaplan_meier(simulated(300, 12));
  double prev = 0.0;
  for (double p : {0.05, 0.1, 0.25, 0.4, 0.5}) {
    const auto q = survival_quantile(big, p, 0.95, Transform::loglog);
    CHECK(q.quantile >= prev);
    prev = q.quantile;
    REQUIRE(q.ci);
    CHECK(q.ci->lo <= q.quantile);
    CHECK(q.ci->hi >= q.quantile);
  }
}

TEST_CASE("Dabrowska reductions") {
  const std::vector<double> t1 = {1.0, 2.0, 3.0, 2.5, 0.5, 4.0};
  const std::vector<double> t2 = {2.0, 1.0, 3.5, 0.7, 2.2, 1.5};
  const BivariateSample pairs(t1, t2, std::vector<int>(6, 1), std::vector<int>(6, 1));
  const auto est = dabrowska(pairs);
  for (double s : est.grid_s) {
    for (double t : est.grid_t) {
      CHECK(est.value(s, t) == doctest::Approx(oracle::empirical_survivor(t1, t2, s, t)).epsilon(1e-14));
    }
  }
  CHECK(est.value(0.0, 0.0) == 1.0);

  // ties put every subject at risk in a quadrant on one line; the surface
  // must still be the empirical survivor, which is zero beyond that cell
  const std::vector<double> a1 = {3, 1, 2, 2, 5};
  const std::vector<double> a2 = {1, 1, 4, 2, 0.5};
  const auto tied = dabrowska(BivariateSample(a1, a2, std::vector<int>(5, 1), std::vector<int>(5, 1)));
  for (double s : tied.grid_s) {
    for (double t : tied.grid_t) {
      CHECK(std::abs(tied.value(s, t) - oracle::empirical_survivor(a1, a2, s, t)) <= 1e-14);
    }
  }

  const BivariateSample censored({1.0, 2.0, 3.0, 1.5}, {2.0, 1.0, 0.5, 2.5}, {1, 0, 1, 1},
                                 {0, 1, 1, 1});
  const auto c = dabrowska(censored);
  const auto km2 = kaplan_meier(std::vector<double>{2.0, 1.0, 0.5, 2.5}, std::vector<int>{0, 1, 1, 1});
  const auto km1 = kaplan_meier(std::vector<double>{1.0, 2.0, 3.0, 1.5}, std::vector<int>{1, 0, 1, 1});
  for (double t : c.grid_t) CHECK(c.value(0.0, t) == km2.estimate(t));
  for (double s : c.grid_s) CHECK(c.value(s, 0.0) == km1.estimate(s));
  for (double s : c.grid_s) {
    double prev = 1.0;
    for (double t : c.grid_t) {
      CHECK(c.value(s, t) <= prev + 1e-15);
      prev = c.value(s, t);
    }
  }

  const auto single = dabrowska(BivariateSample({2.0}, {3.0}, {1}, {1}));
  CHECK(single.value(1.9, 2.9) == 1.0);
  CHECK(single.value(2.0, 1.0) == 0.0);
  CHECK(single.value(1.0, 3.0) == 0.0);
}
