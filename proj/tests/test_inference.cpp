#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "inference.hpp"
#include "oracles.hpp"

using namespace gibbsfit;
namespace oracle = gibbsfit::testing;

namespace {

Eigen::MatrixXd naive_sigma(
    const std::map<CellIndex, Eigen::VectorXd>& cells, double cell_size,
    double dvee, double area) {
  const Eigen::Index p = cells.begin()->second.size();
  const auto rho =
      static_cast<std::int64_t>(std::ceil(dvee / cell_size - 1e-9));
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [i, gi] : cells) {
    for (const auto& [j, gj] : cells) {
      if (std::max(std::abs(j.i1 - i.i1), std::abs(j.i2 - i.i2)) <= rho) {
        sigma.noalias() += gi * gj.transpose();
      }
    }
  }
  return sigma / area;
}

std::map<CellIndex, Eigen::VectorXd> random_cells(Rng& rng, int extent,
                                                  int p) {
  std::map<CellIndex, Eigen::VectorXd> cells;
  for (std::int64_t i = -extent; i <= extent; ++i) {
    for (std::int64_t j = -extent; j <= extent; ++j) {
      Eigen::VectorXd g(p);
      for (int c = 0; c < p; ++c) g[c] = rng.uniform(-1, 1);
      cells.emplace(CellIndex{i, j}, g);
    }
  }
  return cells;
}

}  // namespace

TEST_CASE("sigma_hat fixed examples") {
  // Single cell with gradient g on area A: g g^T / A.
  std::map<CellIndex, Eigen::VectorXd> one;
  Eigen::VectorXd g(2);
  g << 1.0, -2.0;
  one.emplace(CellIndex{0, 0}, g);
  const Eigen::MatrixXd s1 = sigma_hat_blocks(one, 1.0, 1.0, 4.0);
  CHECK(s1(0, 0) == doctest::Approx(0.25));
  CHECK(s1(0, 1) == doctest::Approx(-0.5));
  CHECK(s1(1, 1) == doctest::Approx(1.0));

  // Two adjacent cells: all four outer products.
  std::map<CellIndex, Eigen::VectorXd> two;
  Eigen::VectorXd g1(1), g2(1);
  g1 << 2.0;
  g2 << 3.0;
  two.emplace(CellIndex{0, 0}, g1);
  two.emplace(CellIndex{1, 0}, g2);
  const Eigen::MatrixXd s2 = sigma_hat_blocks(two, 1.0, 1.0, 5.0);
  CHECK(s2(0, 0) == doctest::Approx((4.0 + 6.0 + 6.0 + 9.0) / 5.0));
}

TEST_CASE("sigma_hat equals the naive double loop exactly") {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + static_cast<int>(rng.uniform_index(4));
    const int extent = 1 + static_cast<int>(rng.uniform_index(4));
    const auto cells = random_cells(rng, extent, p);
    const double cell_size = rng.uniform(0.4, 1.5);
    const double dvee = cell_size * (1.0 + rng.uniform_index(3));
    const double area = rng.uniform(1.0, 50.0);
    const Eigen::MatrixXd fast =
        sigma_hat_blocks(cells, cell_size, dvee, area);
    const Eigen::MatrixXd slow = naive_sigma(cells, cell_size, dvee, area);
    CHECK((fast - slow).lpNorm<Eigen::Infinity>() == 0.0);
    // symmetric up to summation-order rounding
    CHECK((fast - fast.transpose()).lpNorm<Eigen::Infinity>() <=
          1e-14 * std::max(1.0, fast.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("sandwich_covariance algebra") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd quarter = sandwich_covariance(eye, eye, 4.0);
  CHECK((quarter - 0.25 * eye).lpNorm<Eigen::Infinity>() <= 1e-15);

  Eigen::MatrixXd u2 = Eigen::MatrixXd::Zero(2, 2);
  u2.diagonal() << 2.0, 4.0;
  Eigen::MatrixXd sig = Eigen::MatrixXd::Zero(2, 2);
  sig.diagonal() << 8.0, 32.0;
  const Eigen::MatrixXd v = sandwich_covariance(u2, sig, 1.0);
  CHECK(v(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(v(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(v(0, 1)) <= 1e-12);

  // Random SPD inputs against an independent inverse route.
  Rng rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + static_cast<int>(rng.uniform_index(3));
    Eigen::MatrixXd a(p, p), b(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        a(i, j) = rng.uniform(-1, 1);
        b(i, j) = rng.uniform(-1, 1);
      }
    }
    const Eigen::MatrixXd u = a * a.transpose() +
                              Eigen::MatrixXd::Identity(p, p);
    const Eigen::MatrixXd s = b * b.transpose();
    const double area = rng.uniform(0.5, 20.0);
    const Eigen::MatrixXd fast = sandwich_covariance(u, s, area);
    const Eigen::MatrixXd inv = u.fullPivLu().inverse();
    const Eigen::MatrixXd slow = inv * s * inv / area;
    CHECK((fast - slow).lpNorm<Eigen::Infinity>() <=
          1e-10 * std::max(1.0, slow.lpNorm<Eigen::Infinity>()));
  }

  // Ill-conditioned u2 raises an identifiability error.
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(sandwich_covariance(singular, eye, 1.0), Error);
}

TEST_CASE("confidence_intervals quantiles") {
  Eigen::VectorXd theta(2);
  theta << 1.0, -0.5;
  Eigen::MatrixXd vcov = Eigen::MatrixXd::Zero(2, 2);

  const auto degenerate = confidence_intervals(theta, vcov, 0.95);
  CHECK(degenerate[0][0] == 1.0);
  CHECK(degenerate[0][1] == 1.0);

  vcov(0, 0) = 1.0;
  const auto normal95 = confidence_intervals(theta, vcov, 0.95);
  CHECK(normal95[0][0] == doctest::Approx(1.0 - 1.959964).epsilon(1e-6));
  CHECK(normal95[0][1] == doctest::Approx(1.0 + 1.959964).epsilon(1e-6));

  vcov(1, 1) = 4.0;
  const auto half = confidence_intervals(theta, vcov, 0.5);
  CHECK(half[1][1] - (-0.5) == doctest::Approx(2.0 * 0.674490).epsilon(1e-5));

  CHECK_THROWS_AS(confidence_intervals(theta, vcov, 1.0), Error);
}

TEST_CASE("identifiability diagnostic flags near-singular matrices") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  const auto clean = identifiability_diagnostic(eye, eye);
  CHECK(clean.u2_condition == doctest::Approx(1.0));
  CHECK_FALSE(clean.u2_flagged);

  Eigen::MatrixXd rank1 = Eigen::MatrixXd::Zero(2, 2);
  rank1(0, 0) = 1.0;
  const auto flagged = identifiability_diagnostic(rank1, eye.topLeftCorner(2, 2));
  CHECK(flagged.u2_flagged);
}

TEST_CASE("fit recovers the closed-form Poisson rate") {
  const Window obs(0, 10, 0, 10);
  Rng rng(71);
  const auto poisson = ModelSpec::poisson();
  const auto phi = oracle::random_pattern(obs, MarkSpace::unit(), 100, rng);
  const auto quad = build_quadrature(obs, MarkSpace::unit(), 64, 64, 1);
  const FitResult fit = fit_mple(poisson, phi, obs, quad, 1.0, 0.0);
  CHECK(fit.trace.converged);
  CHECK(std::abs(fit.theta_hat[0] - 0.0) <= 1e-8);  // -log(100/100)

  const auto phi2 = oracle::random_pattern(obs, MarkSpace::unit(), 173, rng);
  const FitResult fit2 = fit_mple(poisson, phi2, obs, quad, 1.0, 0.0);
  CHECK(std::abs(fit2.theta_hat[0] + std::log(173.0 / 100.0)) <= 1e-8);

  // Determinism: bit-identical refit.
  const FitResult again = fit_mple(poisson, phi2, obs, quad, 1.0, 0.0);
  CHECK(again.theta_hat[0] == fit2.theta_hat[0]);

  // Monotone objective at every accepted step.
  for (std::size_t i = 1; i < fit2.trace.objective_history.size(); ++i) {
    CHECK(fit2.trace.objective_history[i] <=
          fit2.trace.objective_history[i - 1] + 1e-14);
  }
}

TEST_CASE("fit flags divergence on an empty pattern") {
  const Window obs(0, 10, 0, 10);
  const auto poisson = ModelSpec::poisson();
  const PointPattern empty({}, obs, MarkSpace::unit());
  const auto quad = build_quadrature(obs, MarkSpace::unit(), 32, 32, 1);
  const FitResult fit = fit_mple(poisson, empty, obs, quad, 1.0, 0.0);
  CHECK_FALSE(fit.trace.converged);
  CHECK(fit.trace.iterations == 100);
  CHECK(fit.theta_hat[0] > 50.0);
}

TEST_CASE("active nonnegativity bounds are reported") {
  // A tightly clustered pattern wants negative inhibition; the projected
  // solver pins theta2 at zero and invalidates its interval.
  const Window obs(0, 6, 0, 6);
  std::vector<MarkedPoint> pts;
  Rng rng(73);
  for (int c = 0; c < 12; ++c) {
    const double cx = rng.uniform(1.5, 4.5), cy = rng.uniform(1.5, 4.5);
    for (int i = 0; i < 4; ++i) {
      pts.push_back(MarkedPoint{cx + rng.uniform(-0.2, 0.2),
                                cy + rng.uniform(-0.2, 0.2), 0.0});
    }
  }
  const PointPattern phi(std::move(pts), obs, MarkSpace::unit());
  const auto strauss = ModelSpec::multi_strauss(1, {PairGrid{{0.0, 1.0}}});
  const Window fit_win(1, 5, 1, 5);
  const auto quad = build_quadrature(fit_win, MarkSpace::unit(), 96, 96, 1);
  const FitResult fit = fit_mple(strauss, phi, fit_win, quad, 1.0, 1.0);
  CHECK(fit.theta_hat[1] == 0.0);
  CHECK_FALSE(fit.ci_valid[1]);
  CHECK(fit.ci_valid[0]);
}

TEST_CASE("gnz residuals vanish at the fitted parameters") {
  const Window obs(0, 6, 0, 6);
  Rng rng(79);
  const auto strauss = ModelSpec::multi_strauss(1, {PairGrid{{0.0, 1.0}}});
  const auto phi = oracle::random_pattern(obs, MarkSpace::unit(), 45, rng);
  const Window fit_win(1, 4, 1, 4);
  const auto quad = build_quadrature(fit_win, MarkSpace::unit(), 128, 128, 1);
  const FitResult fit = fit_mple(strauss, phi, fit_win, quad, 1.0, 1.0);
  REQUIRE(fit.trace.converged);

  std::vector<double> theta(fit.theta_hat.data(),
                            fit.theta_hat.data() + fit.theta_hat.size());
  for (int j = 0; j < strauss.dimension(); ++j) {
    const double res = gnz_residual(strauss, theta, phi, fit_win, quad, j);
    CHECK(std::abs(res) <= 10.0 * 1e-8 * fit.area);
  }

  // Empty pattern, g == 1: strictly negative (no data term).
  const PointPattern empty({}, obs, MarkSpace::unit());
  const double raw = gnz_residual(strauss, std::vector<double>{0.2, 0.3},
                                  empty, fit_win, quad, -1);
  CHECK(raw < 0.0);
}

TEST_CASE("duplicated statistics are diagnosed, then rejected by the "
          "sandwich") {
  // Two bands where the second is so thin it never captures a pair: the
  // contrast Hessian acquires a zero row/column.
  const auto degenerate = ModelSpec::multi_strauss(
      1, {PairGrid{{0.0, 0.5, 0.5 + 1e-9}}});
  const Window obs(0, 6, 0, 6);
  Rng rng(83);
  const auto phi = oracle::random_pattern(obs, MarkSpace::unit(), 40, rng);
  const Window fit_win(1, 5, 1, 5);
  const auto quad = build_quadrature(fit_win, MarkSpace::unit(), 64, 64, 1);

  LplEvaluator eval(degenerate, phi, fit_win, quad);
  const Eigen::MatrixXd u2 =
      eval.hessian(std::vector<double>{0.0, 0.0, 0.0}) / fit_win.area();
  const auto report = identifiability_diagnostic(u2, u2);
  CHECK(report.u2_flagged);

  CHECK_THROWS_AS(
      fit_mple(degenerate, phi, fit_win, quad, 1.0, 1.0), Error);
}
