// Acceptance suite: one check per release criterion, each printed as a
// single PASS/FAIL line with its runtime. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "inference.hpp"
#include "oracles.hpp"
#include "simulate.hpp"

using namespace gibbsfit;
namespace oracle = gibbsfit::testing;

namespace {

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

PointPattern simulate_pattern(const ModelSpec& model,
                              const std::vector<double>& theta,
                              const Window& window, long long steps,
                              long long burn, std::uint64_t seed) {
  SimConfig config;
  config.theta = theta;
  config.window = window;
  config.steps = steps;
  config.burn_in = burn;
  config.seed = seed;
  return simulate_mh(model, config).pattern;
}

FitResult fit_pattern(const ModelSpec& model, const PointPattern& pattern,
                      double dvee, double cell, int grid, int mark_nodes) {
  const Window fit_window = erode_window(pattern.window(), dvee);
  const auto quad = build_quadrature(fit_window, model.mark_space(), grid,
                                     grid, mark_nodes);
  FitOptions options;
  options.threads = 2;
  return fit_mple(model, pattern, fit_window, quad, cell, dvee, options);
}

// ---- criterion 1 ---------------------------------------------------------

Check sufficient_statistic_oracle() {
  Check check;
  Rng rng(20260810);
  for (const auto& fx : oracle::family_fixtures()) {
    const bool integer_stats =
        fx.model.family() != Family::overlap_area &&
        fx.model.family() != Family::area_interaction;
    for (int trial = 0; trial < 500; ++trial) {
      const PointPattern phi = fx.random_config(rng);
      const MarkedPoint x = fx.random_point(rng);
      bool clash = false;
      for (const auto& q : phi.points()) {
        if (q.x == x.x && q.y == x.y) clash = true;
      }
      if (clash) continue;
      const StatValue local = local_statistics(fx.model, x, phi);
      const StatValue before = global_statistics(fx.model, phi);
      std::vector<MarkedPoint> extended(phi.points().begin(),
                                        phi.points().end());
      extended.push_back(x);
      const StatValue after = global_statistics(
          fx.model, PointPattern(std::move(extended), phi.window(),
                                 phi.mark_space()));
      for (std::size_t c = 0; c < local.v.size(); ++c) {
        const double diff = after.v[c] - before.v[c];
        if (integer_stats) {
          check.require(local.v[c] == diff,
                        family_name(fx.model.family()) +
                            ": integer statistic mismatch");
        } else {
          check.require(std::abs(local.v[c] - diff) <= 1e-9,
                        family_name(fx.model.family()) +
                            ": |local - global difference| > 1e-9");
        }
      }
    }
  }
  return check;
}

// ---- criterion 2 ---------------------------------------------------------

Check geometry_oracles() {
  Check check;
  Rng rng(20260811);
  const std::size_t samples = 10'000'000;
  for (int trial = 0; trial < 100; ++trial) {
    const double R = rng.uniform(0.3, 2.0);
    const double r = rng.uniform(0.0, R);
    const auto mc = oracle::mc_disc_overlap(r, R, samples, rng.next());
    check.require(
        std::abs(disc_overlap_area(r, R) - mc.value) <= 3.0 * mc.se,
        "disc_overlap_area outside 3 MC standard errors (trial " +
            std::to_string(trial) + ")");
  }
  for (int trial = 0; trial < 100; ++trial) {
    const double R = rng.uniform(0.4, 1.5);
    const Point c{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::vector<Point> existing;
    const auto count = rng.uniform_index(7);
    for (std::uint64_t i = 0; i < count; ++i) {
      existing.push_back(Point{c.x + rng.uniform(-2.0 * R, 2.0 * R),
                               c.y + rng.uniform(-2.0 * R, 2.0 * R)});
    }
    const auto mc =
        oracle::mc_added_disc_area(c, R, existing, samples, rng.next());
    check.require(
        std::abs(added_disc_area(c, R, existing) - mc.value) <= 3.0 * mc.se,
        "added_disc_area outside 3 MC standard errors (trial " +
            std::to_string(trial) + ")");
  }
  return check;
}

// ---- criterion 3 ---------------------------------------------------------

Check model_condition_bounds() {
  Check check;
  Rng rng(20260812);
  for (const auto& fx : oracle::family_fixtures()) {
    const double D = fx.model.interaction_range();
    const auto& comps = fx.model.components();
    for (int trial = 0; trial < 10'000; ++trial) {
      const PointPattern phi = fx.random_config(rng, 25);
      const MarkedPoint x = fx.random_point(rng);
      bool clash = false;
      std::size_t in_ball = 0;
      for (const auto& q : phi.points()) {
        const double d2 = squared_distance(q.location(), x.location());
        if (d2 == 0.0) clash = true;
        if (d2 <= D * D) ++in_ball;
      }
      if (clash) continue;
      const auto theta = fx.random_theta(rng);

      // stability
      const double bound = stability_bound(fx.model, theta);
      const double energy = local_energy(fx.model, theta, x, phi);
      check.require(energy >= -bound - 1e-9,
                    family_name(fx.model.family()) + ": [Mod:S] violated");

      // locality
      const StatValue base = local_statistics(fx.model, x, phi);
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double dist = rng.uniform(D + 1e-9, D + 2.0);
      const MarkedPoint far{x.x + dist * std::cos(angle),
                            x.y + dist * std::sin(angle),
                            oracle::sample_mark_for(fx.model.mark_space(), rng)};
      bool far_ok = true;
      if (fx.model.hard_core()) {
        for (const auto& q : phi.points()) {
          if (squared_distance(q.location(), far.location()) <
              fx.model.hard_core_delta() * fx.model.hard_core_delta()) {
            far_ok = false;
          }
        }
      }
      if (far_ok) {
        std::vector<MarkedPoint> pts(phi.points().begin(),
                                     phi.points().end());
        pts.push_back(far);
        const Window big(std::min(phi.window().xmin, far.x) - 1.0,
                         std::max(phi.window().xmax, far.x) + 1.0,
                         std::min(phi.window().ymin, far.y) - 1.0,
                         std::max(phi.window().ymax, far.y) + 1.0);
        const StatValue moved = local_statistics(
            fx.model, x,
            PointPattern(std::move(pts), big, fx.model.mark_space()));
        for (std::size_t c = 0; c < base.v.size(); ++c) {
          check.require(moved.v[c] == base.v[c],
                        family_name(fx.model.family()) +
                            ": [Mod:L] violated");
        }
      }

      // integrability
      for (std::size_t c = 0; c < base.v.size(); ++c) {
        const double cap =
            comps[c].power == 0
                ? comps[c].kappa_sup
                : comps[c].kappa_sup *
                      std::pow(static_cast<double>(in_ball),
                               static_cast<double>(comps[c].power));
        check.require(std::abs(base.v[c]) <= cap + 1e-9,
                      family_name(fx.model.family()) + ": [Mod:I] violated");
      }
    }
  }
  return check;
}

// ---- criterion 4 ---------------------------------------------------------

Check calculus_checks() {
  Check check;
  Rng rng(20260813);
  for (const auto& fx : oracle::family_fixtures()) {
    const double D = fx.model.interaction_range();
    const Window obs(fx.window.xmin - D, fx.window.xmax + D,
                     fx.window.ymin - D, fx.window.ymax + D);
    for (int trial = 0; trial < 20; ++trial) {
      PointPattern inner = fx.random_config(rng, 20);
      std::vector<MarkedPoint> pts(inner.points().begin(),
                                   inner.points().end());
      if (fx.model.hard_core()) {
        // keep the hard core intact when re-homing the points
      }
      const PointPattern pattern(std::move(pts), obs, fx.model.mark_space());
      const int mark_nodes =
          fx.model.mark_space().kind == MarkKind::interval ? 8 : 1;
      const auto quad = build_quadrature(fx.window, fx.model.mark_space(), 24,
                                         24, mark_nodes);
      LplEvaluator eval(fx.model, pattern, fx.window, quad);
      const auto theta = fx.random_theta(rng);

      const Eigen::VectorXd grad = eval.gradient(theta);
      const auto fd = oracle::fd_gradient(
          [&](std::span<const double> t) { return eval.lpl(t); }, theta,
          1e-5);
      for (Eigen::Index j = 0; j < grad.size(); ++j) {
        const double scale =
            std::max({1.0, std::abs(grad[j]),
                      std::abs(fd[static_cast<std::size_t>(j)])});
        check.require(std::abs(grad[j] - fd[static_cast<std::size_t>(j)]) <=
                          1e-6 * scale,
                      family_name(fx.model.family()) +
                          ": gradient vs finite differences > 1e-6");
      }

      const Eigen::MatrixXd hess = eval.hessian(theta);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
      check.require(es.eigenvalues().minCoeff() >= -1e-10 * hess.trace(),
                    family_name(fx.model.family()) +
                        ": Hessian eigenvalue below -1e-10 trace");

      std::vector<double> t(theta);
      for (int k = 0; k < fx.model.dimension(); ++k) {
        const double step = 1e-5;
        const double keep = t[static_cast<std::size_t>(k)];
        t[static_cast<std::size_t>(k)] = keep + step;
        const Eigen::VectorXd up = eval.gradient(t);
        t[static_cast<std::size_t>(k)] = keep - step;
        const Eigen::VectorXd down = eval.gradient(t);
        t[static_cast<std::size_t>(k)] = keep;
        const Eigen::VectorXd fd_col = (up - down) / (2.0 * step);
        for (int j = 0; j < fx.model.dimension(); ++j) {
          const double scale = std::max(1.0, std::abs(hess(j, k)));
          check.require(std::abs(-hess(j, k) - fd_col[j]) <= 1e-5 * scale,
                        family_name(fx.model.family()) +
                            ": Hessian vs gradient differences > 1e-5");
        }
      }

      const auto cells = eval.cell_gradients(theta, 1.0);
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(grad.size());
      for (const auto& [cell, value] : cells) sum += value;
      check.require((sum - grad).lpNorm<Eigen::Infinity>() <=
                        1e-9 * std::max(1.0, grad.lpNorm<Eigen::Infinity>()),
                    family_name(fx.model.family()) +
                        ": cell gradients do not sum to the gradient");
    }
  }
  return check;
}

// ---- criterion 5 ---------------------------------------------------------

Check poisson_closed_form() {
  Check check;
  Rng rng(20260814);
  const Window obs(0, 10, 0, 10);
  const auto poisson = ModelSpec::poisson();
  for (int n : {37, 100, 215}) {
    const auto phi = oracle::random_pattern(obs, MarkSpace::unit(),
                                            static_cast<std::size_t>(n), rng);
    const auto quad = build_quadrature(obs, MarkSpace::unit(), 64, 64, 1);
    const FitResult fit = fit_mple(poisson, phi, obs, quad, 1.0, 0.0);
    const double expected = -std::log(static_cast<double>(n) / obs.area());
    check.require(fit.trace.converged, "Poisson fit did not converge");
    check.require(std::abs(fit.theta_hat[0] - expected) <= 1e-8,
                  "theta_hat differs from -log(n/|W|) by more than 1e-8");
  }
  return check;
}

// ---- criterion 6 ---------------------------------------------------------

Check sigma_exactness() {
  Check check;
  Rng rng(20260815);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 1 + static_cast<int>(rng.uniform_index(5));
    const int extent = 1 + static_cast<int>(rng.uniform_index(5));
    std::map<CellIndex, Eigen::VectorXd> cells;
    for (std::int64_t i = -extent; i <= extent; ++i) {
      for (std::int64_t j = -extent; j <= extent; ++j) {
        Eigen::VectorXd g(p);
        for (int c = 0; c < p; ++c) g[c] = rng.uniform(-1, 1);
        cells.emplace(CellIndex{i, j}, g);
      }
    }
    const double cell_size = rng.uniform(0.4, 1.6);
    const double dvee = cell_size * (1.0 + rng.uniform_index(3));
    const double area = rng.uniform(1.0, 40.0);
    const auto rho =
        static_cast<std::int64_t>(std::ceil(dvee / cell_size - 1e-9));
    const Eigen::MatrixXd fast =
        sigma_hat_blocks(cells, cell_size, dvee, area);
    Eigen::MatrixXd slow = Eigen::MatrixXd::Zero(p, p);
    for (const auto& [i, gi] : cells) {
      for (const auto& [j, gj] : cells) {
        if (std::max(std::abs(j.i1 - i.i1), std::abs(j.i2 - i.i2)) <= rho) {
          slow.noalias() += gi * gj.transpose();
        }
      }
    }
    slow /= area;
    check.require((fast - slow).lpNorm<Eigen::Infinity>() == 0.0,
                  "blocked covariance differs from the naive double loop");
  }
  return check;
}

// ---- criterion 7 ---------------------------------------------------------

Check consistency_study() {
  Check check;
  const auto model = ModelSpec::overlap_area(1.0);
  const std::vector<double> theta_star{-std::log(2.0), 1.0};
  const int replicates = 50;

  std::vector<std::vector<double>> medians;  // per side, per component
  for (const double side : {10.0, 20.0, 40.0}) {
    const Window obs(0, side + 2.0, 0, side + 2.0);
    std::vector<double> err1, err2;
    for (int rep = 0; rep < replicates; ++rep) {
      const long long steps = static_cast<long long>(400.0 * obs.area()) +
                              50'000;
      const auto pattern = simulate_pattern(
          model, theta_star, obs, steps, steps / 2,
          900'000 + static_cast<std::uint64_t>(side * 100) +
              static_cast<std::uint64_t>(rep));
      const FitResult fit = fit_pattern(model, pattern, 1.0, 1.0, 256, 1);
      err1.push_back(std::abs(fit.theta_hat[0] - theta_star[0]));
      err2.push_back(std::abs(fit.theta_hat[1] - theta_star[1]));
    }
    medians.push_back({oracle::median(err1), oracle::median(err2)});
  }
  for (std::size_t c = 0; c < 2; ++c) {
    check.require(medians[1][c] < medians[0][c],
                  "median error did not shrink from side 10 to 20");
    check.require(medians[2][c] < medians[1][c],
                  "median error did not shrink from side 20 to 40");
    check.require(medians[2][c] < 0.15,
                  "median error at side 40 is not below 0.15");
  }
  std::printf(
      "          medians: side10 (%.4f, %.4f) side20 (%.4f, %.4f) side40 "
      "(%.4f, %.4f)\n",
      medians[0][0], medians[0][1], medians[1][0], medians[1][1],
      medians[2][0], medians[2][1]);
  return check;
}

// ---- criterion 8 ---------------------------------------------------------

Check coverage_study() {
  Check check;
  const auto model = ModelSpec::multi_strauss(1, {PairGrid{{0.0, 0.75}}});
  const std::vector<double> theta_star{-0.3, 0.8};
  const int replicates = 200;
  const double dvee = 0.75;
  const Window obs(0, 31.5, 0, 31.5);

  int covered[2] = {0, 0};
  std::vector<double> student1, student2;
  int used = 0;
  for (int rep = 0; rep < replicates; ++rep) {
    const auto pattern =
        simulate_pattern(model, theta_star, obs, 400'000, 200'000,
                         700'000 + static_cast<std::uint64_t>(rep));
    const FitResult fit = fit_pattern(model, pattern, dvee, dvee, 256, 1);
    if (!fit.trace.converged) continue;
    ++used;
    for (int c = 0; c < 2; ++c) {
      if (theta_star[static_cast<std::size_t>(c)] >= fit.ci[c][0] &&
          theta_star[static_cast<std::size_t>(c)] <= fit.ci[c][1]) {
        ++covered[c];
      }
    }
    student1.push_back((fit.theta_hat[0] - theta_star[0]) /
                       std::sqrt(fit.vcov(0, 0)));
    student2.push_back((fit.theta_hat[1] - theta_star[1]) /
                       std::sqrt(fit.vcov(1, 1)));
  }
  check.require(used >= replicates - 5, "too many non-converged fits");
  const double cov1 = static_cast<double>(covered[0]) / used;
  const double cov2 = static_cast<double>(covered[1]) / used;
  const double skew1 = oracle::skewness(student1);
  const double skew2 = oracle::skewness(student2);
  std::printf(
      "          coverage (%.3f, %.3f) over %d fits, studentized skew "
      "(%.3f, %.3f)\n",
      cov1, cov2, used, skew1, skew2);
  check.require(cov1 >= 0.88 && cov1 <= 0.99,
                "component-1 coverage outside [0.88, 0.99]");
  check.require(cov2 >= 0.88 && cov2 <= 0.99,
                "component-2 coverage outside [0.88, 0.99]");
  check.require(std::abs(skew1) < 0.5, "studentized skew 1 >= 0.5");
  check.require(std::abs(skew2) < 0.5, "studentized skew 2 >= 0.5");
  return check;
}

// ---- criterion 9 ---------------------------------------------------------

Check gnz_identity() {
  Check check;
  struct Setup {
    ModelSpec model;
    std::vector<double> theta;
    int grid;
    int mark_nodes;
  };
  const std::vector<Setup> setups{
      {ModelSpec::overlap_area(1.0), {-0.3, 0.6}, 128, 1},
      {ModelSpec::strauss_disc(0.4), {-0.5, 0.7}, 128, 16},
  };
  for (const auto& setup : setups) {
    const double D = setup.model.interaction_range();
    const Window obs(0, 10, 0, 10);
    const Window fit_win = erode_window(obs, D);
    const auto quad =
        build_quadrature(fit_win, setup.model.mark_space(), setup.grid,
                         setup.grid, setup.mark_nodes);
    const int chains = 200;
    std::vector<std::vector<double>> residuals(
        static_cast<std::size_t>(setup.model.dimension()) + 1);
    for (int chain = 0; chain < chains; ++chain) {
      const auto pattern = simulate_pattern(
          setup.model, setup.theta, obs, 100'000, 50'000,
          300'000 + static_cast<std::uint64_t>(chain));
      LplEvaluator eval(setup.model, pattern, fit_win, quad);
      residuals[0].push_back(eval.gnz_residual(setup.theta, -1));
      for (int j = 0; j < setup.model.dimension(); ++j) {
        residuals[static_cast<std::size_t>(j) + 1].push_back(
            eval.gnz_residual(setup.theta, j));
      }
    }
    for (std::size_t g = 0; g < residuals.size(); ++g) {
      const double m = oracle::mean(residuals[g]);
      const double se = oracle::sample_sd(residuals[g]) /
                        std::sqrt(static_cast<double>(chains));
      std::printf("          %s g=%s: mean %.4f, se %.4f\n",
                  family_name(setup.model.family()).c_str(),
                  g == 0 ? "1" : ("v" + std::to_string(g)).c_str(), m, se);
      check.require(std::abs(m) <= 3.0 * se,
                    family_name(setup.model.family()) +
                        ": mean GNZ residual outside 3 standard errors");
    }
  }
  return check;
}

// ---- criterion 10 --------------------------------------------------------

Check block_size_surrogate() {
  Check check;
  const auto model = ModelSpec::overlap_area(1.0);
  const std::vector<double> theta_star{-std::log(2.0), 1.0};
  const Window obs(0, 42, 0, 42);
  const int replicates = 8;

  Eigen::MatrixXd coarse = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd fine = Eigen::MatrixXd::Zero(2, 2);
  for (int rep = 0; rep < replicates; ++rep) {
    const auto pattern =
        simulate_pattern(model, theta_star, obs, 700'000, 350'000,
                         110'000 + static_cast<std::uint64_t>(rep));
    const Window fit_win = erode_window(obs, 1.0);
    const auto quad =
        build_quadrature(fit_win, MarkSpace::unit(), 256, 256, 1);
    LplEvaluator eval(model, pattern, fit_win, quad);
    coarse += sigma_hat_blocks(eval.cell_gradients(theta_star, 1.0), 1.0, 1.0,
                               fit_win.area());
    fine += sigma_hat_blocks(eval.cell_gradients(theta_star, 0.5), 0.5, 1.0,
                             fit_win.area());
  }
  coarse /= replicates;
  fine /= replicates;
  const double rel = (coarse - fine).norm() /
                     std::max(coarse.norm(), fine.norm());
  std::printf("          Frobenius gap between block sizes: %.3f\n", rel);
  check.require(rel <= 0.15,
                "block covariances at cell sizes D and D/2 differ by more "
                "than 15%");
  return check;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    std::string label;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "sufficient-statistic oracle (local = global difference)",
       sufficient_statistic_oracle},
      {2, "geometry kernels vs Monte-Carlo oracles", geometry_oracles},
      {3, "stability / locality / integrability bounds",
       model_condition_bounds},
      {4, "gradient, Hessian and cell-gradient calculus",
       calculus_checks},
      {5, "closed-form Poisson rate", poisson_closed_form},
      {6, "block covariance equals the naive double loop", sigma_exactness},
      {7, "consistency across growing windows", consistency_study},
      {8, "normality and interval coverage", coverage_study},
      {9, "Campbell-balance residuals on simulated chains", gnz_identity},
      {10, "block-size invariance of the covariance", block_size_surrogate},
  };

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] %2d. %s (%.1f s)%s%s\n",
                result.pass ? "PASS" : "FAIL", criterion.id,
                criterion.label.c_str(), seconds,
                result.pass ? "" : " -- ", result.detail.c_str());
    std::fflush(stdout);
    if (!result.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
