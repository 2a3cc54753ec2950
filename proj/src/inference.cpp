#include "inference.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>

namespace gibbsfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void project(const ModelSpec& model, Eigen::VectorXd& theta) {
  const auto& comps = model.components();
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (comps[static_cast<std::size_t>(j)].nonnegative && theta[j] < 0.0) {
      theta[j] = 0.0;
    }
  }
}

void fill_covariances(FitResult& result, const ModelSpec& model,
                      const LplEvaluator& eval,
                      std::span<const double> theta, double level) {
  const int p = model.dimension();
  const double area = result.area;
  double value = 0.0;
  Eigen::VectorXd grad(p);
  Eigen::MatrixXd hess(p, p);
  eval.derivatives(theta, &value, &grad, &hess);
  result.u2 = hess / area;
  result.per_cell_gradients = eval.cell_gradients(theta, result.cell_size);
  result.sigma_hat = sigma_hat_blocks(result.per_cell_gradients,
                                      result.cell_size, result.dvee, area);
  result.vcov = sandwich_covariance(result.u2, result.sigma_hat, area);
  result.ci = confidence_intervals(result.theta_hat, result.vcov, level);
  result.identifiability =
      identifiability_diagnostic(result.u2, result.sigma_hat);

  const Eigen::VectorXd u1 = -grad / area;
  result.ci_valid.assign(static_cast<std::size_t>(p), true);
  const auto& comps = model.components();
  for (int j = 0; j < p; ++j) {
    if (comps[static_cast<std::size_t>(j)].nonnegative &&
        result.theta_hat[j] == 0.0 && u1[j] > 0.0) {
      result.ci_valid[static_cast<std::size_t>(j)] = false;
    }
  }
}

void check_cell_and_dvee(const ModelSpec& model, double cell_size,
                         double dvee) {
  const double D = model.interaction_range();
  if (dvee < D - 1e-12) {
    raise(ErrorCode::configuration,
          "dvee must be at least the interaction range D = " +
              std::to_string(D));
  }
  if (!(cell_size > 0.0)) {
    raise(ErrorCode::invalid_input, "cell size must be > 0");
  }
}

Eigen::VectorXd newton_direction(const Eigen::MatrixXd& u2,
                                 const Eigen::VectorXd& u1) {
  Eigen::MatrixXd h = u2;
  double lambda = 1e-10 * u2.trace();
  if (!(lambda > 0.0)) lambda = 1e-300;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() == Eigen::Success) return llt.solve(-u1);
    h = u2 + lambda * Eigen::MatrixXd::Identity(u2.rows(), u2.cols());
    lambda *= 100.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(u2);
  raise(ErrorCode::ill_conditioned,
        "contrast Hessian is singular beyond regularization; eigenvalue "
        "range [" +
            std::to_string(es.eigenvalues().minCoeff()) + ", " +
            std::to_string(es.eigenvalues().maxCoeff()) + "]");
}

}  // namespace

Eigen::MatrixXd sigma_hat_blocks(
    const std::map<CellIndex, Eigen::VectorXd>& cell_gradients,
    double cell_size, double dvee, double area) {
  if (cell_gradients.empty()) {
    raise(ErrorCode::invalid_input, "no cell gradients");
  }
  const Eigen::Index p = cell_gradients.begin()->second.size();
  const auto rho = static_cast<std::int64_t>(
      std::ceil(dvee / cell_size - 1e-9));
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [i, gi] : cell_gradients) {
    for (std::int64_t d1 = -rho; d1 <= rho; ++d1) {
      for (std::int64_t d2 = -rho; d2 <= rho; ++d2) {
        const auto it = cell_gradients.find(CellIndex{i.i1 + d1, i.i2 + d2});
        if (it == cell_gradients.end()) continue;
        sigma.noalias() += gi * it->second.transpose();
      }
    }
  }
  return sigma / area;
}

Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& u2,
                                    const Eigen::MatrixXd& sigma, double area) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(u2);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo >= 1e12) {
    raise(ErrorCode::ill_conditioned,
          "U^(2) is numerically singular (eigenvalues in [" +
              std::to_string(lo) + ", " + std::to_string(hi) +
              "]); the model looks unidentifiable on this data");
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(u2);
  const Eigen::MatrixXd m1 = ldlt.solve(sigma);
  Eigen::MatrixXd vcov = ldlt.solve(m1.transpose()) / area;
  return 0.5 * (vcov + vcov.transpose());
}

double normal_quantile(double prob) {
  boost::math::normal_distribution<double> normal;
  return boost::math::quantile(normal, prob);
}

std::vector<std::array<double, 2>> confidence_intervals(
    const Eigen::VectorXd& theta, const Eigen::MatrixXd& vcov, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    raise(ErrorCode::invalid_input, "confidence level must be in (0, 1)");
  }
  const double z = normal_quantile((1.0 + level) / 2.0);
  std::vector<std::array<double, 2>> ci;
  ci.reserve(static_cast<std::size_t>(theta.size()));
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double half = z * std::sqrt(std::max(0.0, vcov(j, j)));
    ci.push_back({theta[j] - half, theta[j] + half});
  }
  return ci;
}

IdentifiabilityReport identifiability_diagnostic(const Eigen::MatrixXd& u2,
                                                 const Eigen::MatrixXd& sigma) {
  IdentifiabilityReport report;
  const auto analyze = [](const Eigen::MatrixXd& m, Eigen::VectorXd& eigs,
                          double& cond, bool& flag) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    eigs = es.eigenvalues();
    const double lo = eigs.minCoeff();
    const double hi = eigs.maxCoeff();
    cond = lo > 0.0 ? hi / lo : kInf;
    flag = lo < 1e-10 * m.trace();
  };
  analyze(u2, report.u2_eigenvalues, report.u2_condition, report.u2_flagged);
  analyze(sigma, report.sigma_eigenvalues, report.sigma_condition,
          report.sigma_flagged);
  return report;
}

double gnz_residual(const ModelSpec& model, std::span<const double> theta,
                    const PointPattern& pattern, const Window& fit_window,
                    const QuadratureScheme& quad, int stat_index) {
  const ThetaCheck check = validate_theta(model, theta);
  if (!check.ok) raise(ErrorCode::invalid_parameter, check.message);
  return LplEvaluator(model, pattern, fit_window, quad)
      .gnz_residual(theta, stat_index);
}

FitResult inference_at(const ModelSpec& model, const PointPattern& pattern,
                       const Window& fit_window, const QuadratureScheme& quad,
                       double cell_size, double dvee,
                       std::span<const double> theta,
                       const FitOptions& options) {
  check_cell_and_dvee(model, cell_size, dvee);
  const ThetaCheck check = validate_theta(model, theta);
  if (!check.ok) raise(ErrorCode::invalid_parameter, check.message);
  LplEvaluator eval(model, pattern, fit_window, quad, options.threads);
  FitResult result;
  result.theta_hat =
      Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                        static_cast<Eigen::Index>(theta.size()));
  result.fit_window = fit_window;
  result.cell_size = cell_size;
  result.dvee = dvee;
  result.area = fit_window.area();
  result.level = options.level;
  result.data_count = eval.data_count();
  result.trace.converged = true;
  result.trace.stop_reason = "evaluated at fixed theta";
  fill_covariances(result, model, eval, theta, options.level);
  result.trace.grad_norm = 0.0;
  return result;
}

FitResult fit_mple(const ModelSpec& model, const PointPattern& pattern,
                   const Window& fit_window, const QuadratureScheme& quad,
                   double cell_size, double dvee, const FitOptions& options) {
  check_cell_and_dvee(model, cell_size, dvee);

  LplEvaluator eval(model, pattern, fit_window, quad, options.threads);
  const int p = model.dimension();
  const double area = fit_window.area();

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  project(model, theta);

  SolverTrace trace;
  double value = 0.0;
  Eigen::VectorXd grad(p);
  Eigen::MatrixXd hess(p, p);
  double last_step = kInf;

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    eval.derivatives(std::span<const double>(theta.data(),
                                             static_cast<std::size_t>(p)),
                     &value, &grad, &hess);
    const double u_cur = -value / area;
    const Eigen::VectorXd u1 = -grad / area;
    const Eigen::MatrixXd u2 = hess / area;
    trace.iterations = iter;
    trace.grad_norm = u1.lpNorm<Eigen::Infinity>();
    trace.objective_history.push_back(u_cur);

    if (trace.grad_norm < options.grad_tol &&
        last_step <=
            options.step_tol * (1.0 + theta.lpNorm<Eigen::Infinity>())) {
      trace.converged = true;
      trace.stop_reason = "gradient and step below tolerance";
      break;
    }
    if (iter == options.max_iterations) {
      trace.stop_reason = "iteration limit reached";
      break;
    }

    const Eigen::VectorXd direction = newton_direction(u2, u1);
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial(p);
    for (int halvings = 0; halvings < 60; ++halvings) {
      trial = theta + alpha * direction;
      project(model, trial);
      const double u_trial =
          -eval.lpl(std::span<const double>(
              trial.data(), static_cast<std::size_t>(p))) /
          area;
      const double decrease = u1.dot(trial - theta);
      if (std::isfinite(u_trial) &&
          u_trial <= u_cur + options.armijo_c * decrease) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      trace.converged = trace.grad_norm < options.grad_tol;
      trace.stop_reason = trace.converged
                              ? "line search exhausted at a stationary point"
                              : "line search failed";
      break;
    }
    last_step = (trial - theta).lpNorm<Eigen::Infinity>();
    theta = trial;
  }

  FitResult result;
  result.theta_hat = theta;
  result.trace = trace;
  result.fit_window = fit_window;
  result.cell_size = cell_size;
  result.dvee = dvee;
  result.area = area;
  result.level = options.level;
  result.data_count = eval.data_count();
  fill_covariances(
      result, model, eval,
      std::span<const double>(theta.data(), static_cast<std::size_t>(p)),
      options.level);
  return result;
}

}  // namespace gibbsfit
