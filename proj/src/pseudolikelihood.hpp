#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>

#include "quadrature.hpp"

namespace gibbsfit {

/// Log-pseudolikelihood pieces, in the orientation printed by the contrast
/// definitions: `gradient` is the vector with entries
/// integral(v_j e^{-V}) - sum_data(v_j) and `hessian` is the matrix of
/// integral(v_j v_k e^{-V}), which is symmetric positive semidefinite. The
/// normalized contrast quantities are assembled downstream as
/// U = -lpl/|window|, U1 = -gradient/|window|, U2 = hessian/|window|.
struct LplReport {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  std::map<CellIndex, Eigen::VectorXd> per_cell_gradients;
  Window fit_window;
  double cell_size = 0.0;
};

/// Caches every theta-independent quantity of one (model, pattern,
/// fit window, quadrature) tuple: the local statistics at all quadrature
/// nodes and at the data points. Evaluations at different theta are then
/// linear passes with a fixed block reduction tree, so results do not
/// depend on the thread count.
class LplEvaluator {
 public:
  LplEvaluator(const ModelSpec& model, const PointPattern& pattern,
               const Window& fit_window, const QuadratureScheme& quad,
               int threads = 0);

  int dimension() const { return p_; }
  const Window& fit_window() const { return fit_window_; }
  double area() const { return fit_window_.area(); }
  std::size_t data_count() const { return data_index_.size(); }
  const Eigen::VectorXd& data_stat_sum() const { return data_sum_; }
  const ModelSpec& model() const { return model_; }

  /// Eq-form log-pseudolikelihood; -infinity when exp(-V) overflows along
  /// the way (treated as an inadmissible theta by the line search).
  double lpl(std::span<const double> theta) const;
  Eigen::VectorXd gradient(std::span<const double> theta) const;
  Eigen::MatrixXd hessian(std::span<const double> theta) const;
  void derivatives(std::span<const double> theta, double* value,
                   Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const;

  /// Per-cell gradient blocks on the cell_size tiling of the fit window:
  /// quadrature restricted to the cell minus the data sum over the cell.
  /// Cells of the partition with no contribution still appear (as zeros).
  std::map<CellIndex, Eigen::VectorXd> cell_gradients(
      std::span<const double> theta, double cell_size) const;

  /// Residual of the Campbell-type balance: sum over fit-window data points
  /// of g(x, phi minus x) minus integral of g e^{-V}. stat_index -1 takes
  /// g identically 1, otherwise g = v_j.
  double gnz_residual(std::span<const double> theta, int stat_index) const;

 private:
  double node_energy(std::size_t flat, std::span<const double> theta) const;

  ModelSpec model_;
  Window fit_window_;
  QuadratureScheme quad_;
  int threads_ = 0;
  int p_ = 0;
  std::size_t n_marks_ = 0;

  std::vector<double> node_stats_;   // [spatial * n_marks + mark] * p
  std::vector<unsigned char> node_hard_;
  std::vector<Point> data_points_;
  std::vector<std::size_t> data_index_;
  std::vector<double> data_stats_;   // per fit-window data point, p values
  Eigen::VectorXd data_sum_;
};

// Contract-level entry points; these validate theta against the family's
// parameter space and rebuild the cache each call.
double lpl(const ModelSpec& model, std::span<const double> theta,
           const PointPattern& pattern, const Window& fit_window,
           const QuadratureScheme& quad);
Eigen::VectorXd lpl_gradient(const ModelSpec& model,
                             std::span<const double> theta,
                             const PointPattern& pattern,
                             const Window& fit_window,
                             const QuadratureScheme& quad);
Eigen::MatrixXd lpl_hessian(const ModelSpec& model,
                            std::span<const double> theta,
                            const PointPattern& pattern,
                            const Window& fit_window,
                            const QuadratureScheme& quad);
std::map<CellIndex, Eigen::VectorXd> cell_gradients(
    const ModelSpec& model, std::span<const double> theta,
    const PointPattern& pattern, const Window& fit_window, double cell_size,
    const QuadratureScheme& quad);

}  // namespace gibbsfit
