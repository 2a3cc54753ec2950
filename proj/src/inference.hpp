#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>

#include "pseudolikelihood.hpp"

namespace gibbsfit {

struct FitOptions {
  double grad_tol = 1e-8;     // on the sup norm of U^(1)
  int max_iterations = 100;
  double armijo_c = 1e-4;
  double step_tol = 1e-6;     // relative step size, guards recession
  double level = 0.95;        // confidence level
  int threads = 0;
};

struct SolverTrace {
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  std::string stop_reason;
  std::vector<double> objective_history;  // U at every accepted iterate
};

struct IdentifiabilityReport {
  Eigen::VectorXd u2_eigenvalues;
  Eigen::VectorXd sigma_eigenvalues;
  double u2_condition = 0.0;
  double sigma_condition = 0.0;
  bool u2_flagged = false;
  bool sigma_flagged = false;
};

struct FitResult {
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd u2;         // U^(2) at theta_hat (PSD)
  Eigen::MatrixXd sigma_hat;  // block covariance at theta_hat
  Eigen::MatrixXd vcov;       // sandwich covariance of theta_hat
  std::vector<std::array<double, 2>> ci;
  double level = 0.0;
  std::vector<bool> ci_valid;  // false where a parameter bound is active
  SolverTrace trace;
  IdentifiabilityReport identifiability;
  Window fit_window;
  double cell_size = 0.0;   // block size for the covariance cells
  double dvee = 0.0;        // erosion distance the data window carries
  double area = 0.0;        // |fit_window|
  std::size_t data_count = 0;
  std::map<CellIndex, Eigen::VectorXd> per_cell_gradients;
};

/// Maximum pseudolikelihood fit: projected Newton with Armijo backtracking
/// from theta = 0 on the convex contrast U = -lpl/|window|. Nonnegativity
/// constraints are handled by projection; an active bound at convergence is
/// reported and marks that component's normal-theory interval invalid.
FitResult fit_mple(const ModelSpec& model, const PointPattern& pattern,
                   const Window& fit_window, const QuadratureScheme& quad,
                   double cell_size, double dvee,
                   const FitOptions& options = {});

/// The covariance pipeline of fit_mple at a fixed theta, without solving:
/// U^(2), block covariance, sandwich, intervals and diagnostics.
FitResult inference_at(const ModelSpec& model, const PointPattern& pattern,
                       const Window& fit_window, const QuadratureScheme& quad,
                       double cell_size, double dvee,
                       std::span<const double> theta,
                       const FitOptions& options = {});

/// Block covariance: |window|^{-1} sum over cell pairs (i, j) with
/// Chebyshev distance |j - i| <= ceil(dvee / cell_size) of g_i g_j^T.
Eigen::MatrixXd sigma_hat_blocks(
    const std::map<CellIndex, Eigen::VectorXd>& cell_gradients,
    double cell_size, double dvee, double area);

/// |window|^{-1} u2^{-1} sigma u2^{-1}. Throws an identifiability error when
/// u2 has condition number above 1e12.
Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& u2,
                                    const Eigen::MatrixXd& sigma, double area);

double normal_quantile(double prob);

std::vector<std::array<double, 2>> confidence_intervals(
    const Eigen::VectorXd& theta, const Eigen::MatrixXd& vcov, double level);

IdentifiabilityReport identifiability_diagnostic(const Eigen::MatrixXd& u2,
                                                 const Eigen::MatrixXd& sigma);

/// GNZ balance residual with g == 1 (stat_index -1) or g == v_j.
double gnz_residual(const ModelSpec& model, std::span<const double> theta,
                    const PointPattern& pattern, const Window& fit_window,
                    const QuadratureScheme& quad, int stat_index);

}  // namespace gibbsfit
