#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "hazardforge/errors.hpp"
#include "hazardforge/logrank.hpp"
#include "hazardforge/nonparam.hpp"
#include "hazardforge/regress.hpp"
#include "hazardforge/rng.hpp"
#include "hazardforge/simlab.hpp"
#include "oracles.hpp"

using namespace hazardforge;

namespace {

RightCensoredSample with_z(std::vector<double> t, std::vector<int> s, std::vector<double> z) {
  auto base = oracle::sample(std::move(t), std::move(s));
  Eigen::MatrixXd m = Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  return base.with_covariates(m);
}

RightCensoredSample cox_data(std::size_t n, std::uint64_t seed, double beta = 0.7,
                             CovariateLaw::Kind law = CovariateLaw::Kind::normal) {
  SimConfig c;
  c.n = n;
  c.seed = seed;
  c.covariates.kind = law;
  c.model.kind = ModelSpec::Kind::cox;
  c.model.beta = Eigen::VectorXd::Constant(1, beta);
  c.censor.kind = CensorLaw::Kind::exponential;
  c.censor.rate = 0.33;
  return simulate_right_censored(c);
}

}  // namespace

TEST_CASE("Cox exchangeable groups give beta = 0") {
  const auto s = with_z({1, 2, 3, 1, 2, 3}, {1, 0, 1, 1, 0, 1}, {0, 0, 0, 1, 1, 1});
  const auto fit = cox_fit(s);
  CHECK(fit.converged);
  CHECK(std::abs(fit.beta[0]) <= 1e-12);
  CHECK(cox_partial_likelihood(s, Eigen::VectorXd::Zero(1)).score.norm() <= 1e-12);
}

TEST_CASE("Cox n = 4 fixture against the grid oracle") {
  const auto s = with_z({1, 2, 3, 4}, {1, 1, 0, 1}, {0, 1, 0, 1});
  const auto fit = cox_fit(s);
  REQUIRE(fit.converged);
  const double grid_beta = oracle_partial_likelihood(s, uniform_grid(-5.0, 5.0, 1e-4));
  CHECK(std::abs(fit.beta[0] - grid_beta) <= 2e-4);
  // path never decreases
  for (std::size_t k = 1; k < fit.loglik_path.size(); ++k) {
    CHECK(fit.loglik_path[k] >= fit.loglik_path[k - 1] - 1e-12 * std::abs(fit.loglik_path[k - 1]));
  }
}

TEST_CASE("Cox invariances and information") {
  const auto s = cox_data(300, 6);
  const auto fit = cox_fit(s);
  REQUIRE(fit.converged);
  CHECK(fit.score_norm <= 1e-8);
  Eigen::MatrixXd shifted = s.covariates().array() + 5.0;
  const auto moved = cox_fit(s.with_covariates(shifted));
  CHECK(std::abs(moved.beta[0] - fit.beta[0]) <= 1e-10);
  CHECK(std::abs(moved.information(0, 0) - fit.information(0, 0)) <= 1e-10 * fit.information(0, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.information);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * fit.information.trace());

  // Breslow mass: Σ_i exp(β̂ z_i) Â0(T_i) equals the number of events
  double mass = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    mass += std::exp(fit.beta[0] * s.covariates()(static_cast<Eigen::Index>(i), 0)) *
            fit.breslow(s.time(i));
  }
  CHECK(std::abs(mass - static_cast<double>(s.event_count())) <= 1e-8);
}

TEST_CASE("Cox failure modes") {
  // perfect separation: every event has z = 1 and outlives nothing with z = 0
  const auto sep = with_z({1, 2, 3, 4, 5, 6}, {1, 1, 1, 0, 0, 0}, {1, 1, 1, 0, 0, 0});
  CHECK_THROWS_AS(cox_fit(sep), MonotoneLikelihoodError);
  auto base = cox_data(50, 1);
  Eigen::MatrixXd twin(50, 2);
  twin << base.covariates(), base.covariates();
  CHECK_THROWS_AS(cox_fit(base.with_covariates(twin)), RankError);
  CHECK_THROWS_AS(cox_fit(oracle::sample({1, 2}, {0, 0}).with_covariates(Eigen::Vector2d(0, 1))),
                  DomainError);
}

TEST_CASE("score test reproduces log-rank on tie-free data") {
  const auto s = cox_data(200, 8, 0.4, CovariateLaw::Kind::bernoulli);
  const auto score = cox_score_test(s, Eigen::VectorXd::Zero(1));
  const auto lr = k_sample_logrank(s);
  CHECK(std::abs(score.statistic - lr.statistic) <= 1e-10 * lr.statistic);

  Eigen::MatrixXd scaled = s.covariates() * -3.0;
  CHECK(std::abs(cox_score_test(s.with_covariates(scaled), Eigen::VectorXd::Zero(1)).statistic -
                 score.statistic) <= 1e-10 * score.statistic);
  const auto fit = cox_fit(s);
  CHECK(cox_score_test(s, fit.beta).statistic <= 1e-12);
}

TEST_CASE("smoothed Breslow baseline") {
  const auto s = cox_data(200, 4);
  const auto fit = cox_fit(s);
  const std::vector<double> grid = {0.2, 0.5, 1.0};
  const auto direct = smoothed_hazard(fit.breslow, 0.25, Kernel::epanechnikov, grid);
  const auto via = smoothed_baseline(fit, 0.25, Kernel::epanechnikov, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(direct[k] == via[k]);
  // exponential(1) baseline
  CHECK(via[1] == doctest::Approx(1.0).epsilon(0.35));
}

TEST_CASE("Aalen additive model") {
  SimConfig c;
  c.n = 200;
  c.seed = 10;
  c.censor.kind = CensorLaw::Kind::exponential;
  c.censor.rate = 0.5;
  const auto s = simulate_right_censored(c);
  const auto fit = aalen_additive(s);
  const auto na = nelson_aalen(s);
  for (double t : na.estimate.jump_times()) {
    CHECK(std::abs(fit.coefficients[0](t) - na.estimate(t)) <= 1e-12);
  }

  const auto three = with_z({1, 2, 3}, {1, 0, 0}, {1, 0, 2});
  const auto f3 = aalen_additive(three);
  // Y = [[1,1],[1,0],[1,2]], ΔN = e_1: (YᵀY)⁻¹YᵀΔN = (1/3, 0)
  CHECK(f3.coefficients[0](1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(f3.coefficients[1](1.0)) <= 1e-14);

  const auto zero = aalen_additive(s.with_covariates(Eigen::MatrixXd::Zero(200, 1)));
  CHECK(zero.coefficients[1].empty());
  CHECK(!zero.skipped_times.empty());

  // group dummy reproduces per-group NA curves
  const auto g = cox_data(200, 12, 0.5, CovariateLaw::Kind::bernoulli);
  const auto fg = aalen_additive(g);
  std::vector<std::size_t> g0;
  std::vector<std::size_t> g1;
  for (std::size_t i = 0; i < g.size(); ++i) (g.groups()[i] == 0 ? g0 : g1).push_back(i);
  const auto na0 = nelson_aalen(g.subset(g0));
  const auto na1 = nelson_aalen(g.subset(g1));
  const double tmax = std::min(g.subset(g0).time().maxCoeff(), g.subset(g1).time().maxCoeff());
  for (double t : fg.times) {
    if (t >= tmax) break;
    CHECK(std::abs(fg.coefficients[0](t) - na0.estimate(t)) <= 1e-10);
    CHECK(std::abs(fg.coefficients[0](t) + fg.coefficients[1](t) - na1.estimate(t)) <= 1e-10);
  }
  for (const auto& inc : fg.covariance_increments) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inc);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
  }

  const std::vector<double> grid = {0.5, 1.0};
  const auto sm = aalen_smoothed_coefficients(fg, 0.3, Kernel::uniform, grid);
  REQUIRE(sm.size() == 2);
  CHECK(sm[0] == smoothed_hazard(fg.coefficients[0], 0.3, Kernel::uniform, grid));
}

TEST_CASE("Buckley-James") {
  SimConfig c;
  c.n = 100;
  c.seed = 3;
  c.covariates.kind = CovariateLaw::Kind::normal;
  c.model.kind = ModelSpec::Kind::aft;
  c.model.beta = Eigen::VectorXd::Constant(1, 1.0);
  const auto unc = simulate_right_censored(c);
  const auto fit = buckley_james(unc);
  Eigen::MatrixXd x(100, 2);
  x.col(0).setOnes();
  x.col(1) = unc.covariates().col(0);
  const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(unc.time().array().log().matrix());
  CHECK((fit.beta - ols).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(fit.iterations <= 2);

  c.censor.kind = CensorLaw::Kind::exponential;
  c.censor.rate = 0.25;
  const auto cens = simulate_right_censored(c);
  const auto f2 = buckley_james(cens);
  Eigen::MatrixXd x2(100, 2);
  x2.col(0).setOnes();
  x2.col(1) = cens.covariates().col(0);
  const Eigen::VectorXd resid = f2.synthetic - x2 * f2.beta;
  CHECK(std::abs(resid.sum()) <= 1e-8);
  for (std::size_t i = 0; i < cens.size(); ++i) {
    if (cens.event(i)) CHECK(f2.synthetic[static_cast<Eigen::Index>(i)] == std::log(cens.time(i)));
  }
  CHECK_THROWS_AS(buckley_james(oracle::sample({1, 2}, {0, 0}).with_covariates(Eigen::Vector2d(0, 1))),
                  DomainError);

  int good = 0;
  double censored = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    SimConfig rc = c;
    rc.n = 500;
    rc.seed = stream_seed(81, static_cast<std::uint64_t>(r));
    rc.censor.rate = 0.22;
    const auto s = simulate_right_censored(rc);
    censored += 1.0 - static_cast<double>(s.event_count()) / 500.0;
    good += std::abs(buckley_james(s).beta[1] - 1.0) <= 0.15;
  }
  MESSAGE("Buckley-James: censoring " << censored / reps << ", hits " << good);
  CHECK(good >= 180);
}

TEST_CASE("Beran conditional estimator") {
  const auto s = cox_data(60, 15);
  const auto pooled = nelson_aalen(s);
  const auto all = beran_conditional(s, 0.0, 1e3, Kernel::uniform);
  for (double t : pooled.estimate.jump_times()) {
    CHECK(all.hazard.estimate(t) == doctest::Approx(pooled.estimate(t)).epsilon(1e-13));
  }

  const auto iso = beran_conditional(with_z({1, 2, 3}, {1, 1, 1}, {0, 5, 10}), 5.0, 1.0,
                                     Kernel::epanechnikov);
  CHECK(iso.hazard.estimate(1.9) == 0.0);
  CHECK(iso.hazard.estimate(2.0) == 1.0);
  CHECK(iso.survival(2.0) == 0.0);

  std::vector<double> z(s.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = i % 2 == 0 ? 0.0 : 10.0;
  const auto clusters = s.with_covariates(Eigen::Map<Eigen::VectorXd>(z.data(), 60));
  std::vector<std::size_t> even;
  for (std::size_t i = 0; i < 60; i += 2) even.push_back(i);
  const auto direct = nelson_aalen(clusters.subset(even));
  const auto b = beran_conditional(clusters, 0.0, 2.0, Kernel::biweight);
  for (double t : direct.estimate.jump_times()) {
    CHECK(b.hazard.estimate(t) == doctest::Approx(direct.estimate(t)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(beran_conditional(clusters, 5.0, 1.0, Kernel::uniform), EmptyNeighborhoodError);
}

TEST_CASE("parametric likelihood") {
  SimConfig c;
  c.n = 400;
  c.seed = 19;
  c.event.rate = 1.3;
  c.censor.kind = CensorLaw::Kind::exponential;
  c.censor.rate = 0.5;
  const auto s = simulate_right_censored(c);
  const auto expo = parametric_fit(s, ParametricFamily::exponential);
  const double closed = static_cast<double>(s.event_count()) / s.time().sum();
  CHECK(std::abs(expo.theta[0] - closed) <= 1e-10);

  ParametricOptions fixed;
  fixed.fixed_shape = 1.0;
  const auto w1 = parametric_fit(s, ParametricFamily::weibull, fixed);
  CHECK(std::abs(1.0 / w1.theta[1] - closed) <= 1e-10);
  CHECK(std::abs(w1.loglik - expo.loglik) <= 1e-9);

  int good = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    SimConfig wc;
    wc.n = 1000;
    wc.seed = stream_seed(23, static_cast<std::uint64_t>(r));
    wc.event.kind = EventLaw::Kind::weibull;
    wc.event.shape = 1.5;
    wc.event.scale = 2.0;
    wc.censor.kind = CensorLaw::Kind::exponential;
    wc.censor.rate = 0.2;
    const auto fit = parametric_fit(simulate_right_censored(wc), ParametricFamily::weibull);
    good += fit.converged && std::abs(fit.theta[0] - 1.5) <= 0.1;
  }
  CHECK(good >= 180);
}
