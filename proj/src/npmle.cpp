#include "hazardforge/npmle.hpp"

#include <algorithm>
#include <cmath>

#include "hazardforge/errors.hpp"

namespace hazardforge {
namespace {

constexpr double kCertificateSlack = 1e-8;
constexpr double kMonotoneSlack = 1e-12;

// Newton ascent on the masses EM has not driven to zero, with Σp = 1 held by
// a bordered system. Self-consistency converges linearly with a rate near 1
// when the likelihood is flat along the support, so the certificate can lag
// far behind the mass change; a few of these steps close the gap. Returns
// true once the optimality conditions hold.
bool newton_polish(const Eigen::MatrixXd& a, double n, double d_limit, TurnbullSolution& sol) {
  for (int step = 0; step < 50; ++step) {
    const Eigen::VectorXd lik = a * sol.p;
    const Eigen::VectorXd d = a.transpose() * lik.cwiseInverse();
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < sol.p.size(); ++j) {
      // a vanishing mass with d_j > n still wants to grow and stays in play
      if (sol.p[j] > 1e-12 || d[j] > n) active.push_back(j);
    }
    double residual = 0.0;
    for (auto j : active) residual = std::max(residual, std::abs(d[j] - n));
    if (d.maxCoeff() <= d_limit && residual <= 1e-10 * n) return true;

    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd sub(a.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) sub.col(c) = a.col(active[static_cast<std::size_t>(c)]);
    const Eigen::MatrixXd weighted = lik.cwiseInverse().asDiagonal() * sub;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    kkt.topLeftCorner(k, k) = weighted.transpose() * weighted;
    kkt.topRightCorner(k, 1).setOnes();
    kkt.bottomLeftCorner(1, k).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    for (Eigen::Index c = 0; c < k; ++c) rhs[c] = d[active[static_cast<std::size_t>(c)]];
    const Eigen::VectorXd delta = kkt.completeOrthogonalDecomposition().solve(rhs).head(k);

    // stay inside the simplex: a mass headed below zero shrinks twentyfold
    double t = 1.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      const double pj = sol.p[active[static_cast<std::size_t>(c)]];
      if (delta[c] < 0.0) t = std::min(t, 0.95 * pj / -delta[c]);
    }
    bool accepted = false;
    for (int h = 0; h < 40 && !accepted; ++h, t *= 0.5) {
      Eigen::VectorXd next = sol.p;
      for (Eigen::Index c = 0; c < k; ++c) next[active[static_cast<std::size_t>(c)]] += t * delta[c];
      next /= next.sum();
      const double ll = (a * next).array().log().sum();
      if (ll >= sol.loglik) {
        sol.p = std::move(next);
        sol.loglik = ll;
        sol.loglik_path.push_back(ll);
        ++sol.newton_steps;
        accepted = true;
      }
    }
    if (!accepted) return false;
  }
  return false;
}

GridPoint left_point(const IntervalCensoredSample& s, std::size_t i) {
  return {s.left()[i], s.exact(i)};
}

GridPoint right_point(const IntervalCensoredSample& s, std::size_t i) {
  return {s.right()[i], false};
}

}  // namespace

Eigen::MatrixXd TurnbullProblem::support_alpha() const {
  Eigen::MatrixXd a(alpha.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    a.col(static_cast<Eigen::Index>(s)) = alpha.col(static_cast<Eigen::Index>(support[s]));
  }
  return a;
}

TurnbullProblem turnbull_intervals(const IntervalCensoredSample& sample) {
  const std::size_t n = sample.size();
  std::vector<GridPoint> lefts;
  std::vector<GridPoint> rights;
  for (std::size_t i = 0; i < n; ++i) {
    if (sample.left()[i] > sample.right()[i]) {
      throw ValidationError("left endpoint exceeds right endpoint");
    }
    lefts.push_back(left_point(sample, i));
    rights.push_back(right_point(sample, i));
  }
  TurnbullProblem pr;
  pr.grid = lefts;
  pr.grid.insert(pr.grid.end(), rights.begin(), rights.end());
  pr.grid.push_back({0.0, false});
  std::sort(pr.grid.begin(), pr.grid.end());
  pr.grid.erase(std::unique(pr.grid.begin(), pr.grid.end()), pr.grid.end());
  std::sort(lefts.begin(), lefts.end());
  std::sort(rights.begin(), rights.end());
  const std::size_t cols = pr.grid.size() - 1;
  pr.alpha = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < n; ++i) {
    const auto lo = left_point(sample, i);
    const auto hi = right_point(sample, i);
    for (std::size_t j = 0; j < cols; ++j) {
      if (lo <= pr.grid[j] && pr.grid[j + 1] <= hi) {
        pr.alpha(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
      }
    }
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (std::binary_search(lefts.begin(), lefts.end(), pr.grid[j]) &&
        std::binary_search(rights.begin(), rights.end(), pr.grid[j + 1])) {
      pr.support.push_back(j);
    }
  }
  return pr;
}

double turnbull_loglik(const TurnbullProblem& problem, const Eigen::VectorXd& p) {
  const Eigen::VectorXd lik = problem.support_alpha() * p;
  return lik.array().log().sum();
}

TurnbullCertificate turnbull_certificate(const TurnbullProblem& problem,
                                         const Eigen::VectorXd& p) {
  if (static_cast<std::size_t>(p.size()) != problem.m()) {
    throw DomainError("mass vector must have one entry per support interval");
  }
  if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-9) {
    throw DomainError("masses must form a probability vector");
  }
  const Eigen::MatrixXd a = problem.support_alpha();
  const Eigen::VectorXd lik = a * p;
  TurnbullCertificate c;
  c.d = a.transpose() * lik.cwiseInverse();
  c.max_d = c.d.size() > 0 ? c.d.maxCoeff() : 0.0;
  c.is_npmle = c.max_d <= static_cast<double>(problem.n()) + kCertificateSlack;
  return c;
}

TurnbullSolution turnbull_em(const TurnbullProblem& problem, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  const Eigen::MatrixXd a = problem.support_alpha();
  const auto m = a.cols();
  const double n = static_cast<double>(problem.n());
  TurnbullSolution sol;
  sol.p = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  Eigen::VectorXd lik = a * sol.p;
  sol.loglik = lik.array().log().sum();
  sol.loglik_path.push_back(sol.loglik);
  // stop on the mass change; also insist the certificate already holds, since
  // a small step can hide a d_j just above n when p_j is tiny
  const double d_limit = n + 0.1 * kCertificateSlack;
  std::size_t next_polish = 0;
  while (sol.iterations < max_iter) {
    const Eigen::VectorXd d = a.transpose() * lik.cwiseInverse();
    Eigen::VectorXd next = sol.p.cwiseProduct(d) / n;
    next /= next.sum();
    const double change = (next - sol.p).cwiseAbs().maxCoeff();
    sol.p = std::move(next);
    ++sol.iterations;
    lik = a * sol.p;
    const double ll = lik.array().log().sum();
    if (ll < sol.loglik - kMonotoneSlack * std::max(1.0, std::abs(sol.loglik))) {
      sol.monotone = false;
    }
    sol.loglik = ll;
    sol.loglik_path.push_back(ll);
    if (change < tol) {
      const double max_d = (a.transpose() * lik.cwiseInverse()).maxCoeff();
      if (max_d <= d_limit) {
        sol.converged = true;
        break;
      }
    }
    // polish at a stall, and every thousand iterations since a slowly
    // vanishing mass can keep the change just above tol for a long time
    if ((change < tol || sol.iterations % 1000 == 0) && sol.iterations >= next_polish) {
      next_polish = sol.iterations + 1000;
      if (newton_polish(a, n, d_limit, sol)) {
        sol.converged = true;
        break;
      }
      lik = a * sol.p;
    }
  }
  sol.certificate = turnbull_certificate(problem, sol.p);
  return sol;
}

}  // namespace hazardforge
