#include "pseudolikelihood.hpp"

#include <cmath>
#include <limits>

#include "grid_index.hpp"
#include "sums.hpp"

namespace gibbsfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExpCap = 709.0;  // exp() overflows above this
constexpr std::size_t kBlock = 4096;

void check_theta_strict(const ModelSpec& model, std::span<const double> theta) {
  const ThetaCheck check = validate_theta(model, theta);
  if (!check.ok) raise(ErrorCode::invalid_parameter, check.message);
}

}  // namespace

LplEvaluator::LplEvaluator(const ModelSpec& model, const PointPattern& pattern,
                           const Window& fit_window,
                           const QuadratureScheme& quad, int threads)
    : model_(model),
      fit_window_(fit_window),
      quad_(quad),
      threads_(threads),
      p_(model.dimension()),
      n_marks_(quad.mark_count()) {
  if (!(pattern.mark_space() == model.mark_space())) {
    raise(ErrorCode::model_data_mismatch,
          "pattern mark space does not match the model");
  }
  const double D = model.interaction_range();
  const Window& obs = pattern.window();
  const double slack =
      1e-9 * (1.0 + std::max({std::abs(obs.xmin), std::abs(obs.xmax),
                              std::abs(obs.ymin), std::abs(obs.ymax)}));
  if (fit_window.xmin - D < obs.xmin - slack ||
      fit_window.xmax + D > obs.xmax + slack ||
      fit_window.ymin - D < obs.ymin - slack ||
      fit_window.ymax + D > obs.ymax + slack) {
    raise(ErrorCode::configuration,
          "fit window dilated by the interaction range must stay inside the "
          "observation window");
  }

  const std::size_t pp = static_cast<std::size_t>(p_);
  const std::size_t n_spatial = quad_.spatial_count();
  node_stats_.assign(n_spatial * n_marks_ * pp, 0.0);
  node_hard_.assign(n_spatial * n_marks_, 0);

  PointGrid index(pattern.points(), D);
  parallel_blocks(
      n_spatial, kBlock, threads_,
      [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<MarkedPoint> nbrs;
        for (std::size_t s = lo; s < hi; ++s) {
          const Point loc = quad_.spatial_node(s);
          nbrs.clear();
          index.for_neighbours(loc, D, [&](std::size_t, const MarkedPoint& y) {
            nbrs.push_back(y);
          });
          for (std::size_t mk = 0; mk < n_marks_; ++mk) {
            const std::size_t flat = s * n_marks_ + mk;
            MarkedPoint xm{loc.x, loc.y, quad_.mark_nodes[mk]};
            const bool hard = local_statistics_into(
                model_, xm, nbrs,
                std::span<double>(node_stats_.data() + flat * pp, pp));
            node_hard_[flat] = hard ? 1 : 0;
          }
        }
      });

  data_sum_ = Eigen::VectorXd::Zero(p_);
  const auto pts = pattern.points();
  std::vector<MarkedPoint> nbrs;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!fit_window_.contains(pts[i].location())) continue;
    nbrs.clear();
    index.for_neighbours(pts[i].location(), D,
                         [&](std::size_t j, const MarkedPoint& y) {
                           if (j != i) nbrs.push_back(y);
                         });
    data_index_.push_back(i);
    data_points_.push_back(pts[i].location());
    const std::size_t base = data_stats_.size();
    data_stats_.resize(base + pp, 0.0);
    const bool hard = local_statistics_into(
        model_, pts[i], nbrs, std::span<double>(data_stats_.data() + base, pp));
    if (hard) {
      raise(ErrorCode::infeasible_data,
            "data point " + std::to_string(i) + " violates the hard core");
    }
    for (std::size_t c = 0; c < pp; ++c) {
      data_sum_[static_cast<Eigen::Index>(c)] += data_stats_[base + c];
    }
  }
}

double LplEvaluator::node_energy(std::size_t flat,
                                 std::span<const double> theta) const {
  const std::size_t pp = static_cast<std::size_t>(p_);
  const double* v = node_stats_.data() + flat * pp;
  double e = 0.0;
  for (std::size_t c = 0; c < pp; ++c) e += theta[c] * v[c];
  return e;
}

double LplEvaluator::lpl(std::span<const double> theta) const {
  const std::size_t n_flat = quad_.spatial_count() * n_marks_;
  const std::size_t blocks = (n_flat + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  std::vector<unsigned char> overflow(blocks, 0);

  parallel_blocks(n_flat, kBlock, threads_,
                  [&](std::size_t b, std::size_t lo, std::size_t hi) {
                    double acc = 0.0;
                    for (std::size_t flat = lo; flat < hi; ++flat) {
                      if (node_hard_[flat]) continue;
                      const double e = node_energy(flat, theta);
                      if (-e > kExpCap) {
                        overflow[b] = 1;
                        return;
                      }
                      const double w =
                          quad_.spatial_weight *
                          quad_.mark_weights[flat % n_marks_];
                      acc += w * std::exp(-e);
                    }
                    partial[b] = acc;
                  });
  for (unsigned char o : overflow) {
    if (o) return -kInf;
  }
  const double integral = pairwise_sum(partial);

  double data_term = 0.0;
  for (std::size_t c = 0; c < static_cast<std::size_t>(p_); ++c) {
    data_term += theta[c] * data_sum_[static_cast<Eigen::Index>(c)];
  }
  return -integral - data_term;
}

void LplEvaluator::derivatives(std::span<const double> theta, double* value,
                               Eigen::VectorXd* grad,
                               Eigen::MatrixXd* hess) const {
  const std::size_t pp = static_cast<std::size_t>(p_);
  const std::size_t n_flat = quad_.spatial_count() * n_marks_;
  const std::size_t blocks = (n_flat + kBlock - 1) / kBlock;
  const bool want_h = hess != nullptr;
  const std::size_t stride = 1 + pp + (want_h ? pp * pp : 0);
  std::vector<double> partial(blocks * stride, 0.0);

  parallel_blocks(
      n_flat, kBlock, threads_,
      [&](std::size_t b, std::size_t lo, std::size_t hi) {
        double* out = partial.data() + b * stride;
        for (std::size_t flat = lo; flat < hi; ++flat) {
          if (node_hard_[flat]) continue;
          const double* v = node_stats_.data() + flat * pp;
          const double e = node_energy(flat, theta);
          if (-e > kExpCap) {
            raise(ErrorCode::numeric,
                  "exp(-V) overflow at quadrature node " +
                      std::to_string(flat / n_marks_) + ", mark node " +
                      std::to_string(flat % n_marks_));
          }
          const double w = quad_.spatial_weight *
                           quad_.mark_weights[flat % n_marks_] * std::exp(-e);
          out[0] += w;
          for (std::size_t j = 0; j < pp; ++j) out[1 + j] += w * v[j];
          if (want_h) {
            double* h = out + 1 + pp;
            for (std::size_t j = 0; j < pp; ++j) {
              const double wvj = w * v[j];
              for (std::size_t k = j; k < pp; ++k) h[j * pp + k] += wvj * v[k];
            }
          }
        }
      });

  // Tree-reduce per component over the block partials.
  std::vector<double> column(blocks);
  const auto reduce = [&](std::size_t offset) {
    for (std::size_t b = 0; b < blocks; ++b) {
      column[b] = partial[b * stride + offset];
    }
    return pairwise_sum(column);
  };

  const double integral0 = reduce(0);
  if (value) {
    double data_term = 0.0;
    for (std::size_t c = 0; c < pp; ++c) {
      data_term += theta[c] * data_sum_[static_cast<Eigen::Index>(c)];
    }
    *value = -integral0 - data_term;
  }
  if (grad) {
    grad->resize(p_);
    for (std::size_t j = 0; j < pp; ++j) {
      (*grad)[static_cast<Eigen::Index>(j)] =
          reduce(1 + j) - data_sum_[static_cast<Eigen::Index>(j)];
    }
  }
  if (want_h) {
    hess->resize(p_, p_);
    for (std::size_t j = 0; j < pp; ++j) {
      for (std::size_t k = j; k < pp; ++k) {
        const double s = reduce(1 + pp + j * pp + k);
        (*hess)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = s;
        (*hess)(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = s;
      }
    }
  }
}

Eigen::VectorXd LplEvaluator::gradient(std::span<const double> theta) const {
  Eigen::VectorXd g;
  derivatives(theta, nullptr, &g, nullptr);
  return g;
}

Eigen::MatrixXd LplEvaluator::hessian(std::span<const double> theta) const {
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  derivatives(theta, nullptr, &g, &h);
  return h;
}

std::map<CellIndex, Eigen::VectorXd> LplEvaluator::cell_gradients(
    std::span<const double> theta, double cell_size) const {
  const std::size_t pp = static_cast<std::size_t>(p_);
  CellGrid grid(fit_window_, cell_size);
  std::map<CellIndex, Eigen::VectorXd> out;
  for (const CellIndex& c : grid.cells()) {
    out.emplace(c, Eigen::VectorXd::Zero(p_));
  }

  const std::size_t n_flat = quad_.spatial_count() * n_marks_;
  for (std::size_t flat = 0; flat < n_flat; ++flat) {
    if (node_hard_[flat]) continue;
    const double e = node_energy(flat, theta);
    if (-e > kExpCap) {
      raise(ErrorCode::numeric, "exp(-V) overflow at quadrature node " +
                                    std::to_string(flat / n_marks_));
    }
    const double w = quad_.spatial_weight * quad_.mark_weights[flat % n_marks_] *
                     std::exp(-e);
    const Point loc = quad_.spatial_node(flat / n_marks_);
    Eigen::VectorXd& cell = out.at(grid.cell_of(loc));
    const double* v = node_stats_.data() + flat * pp;
    for (std::size_t j = 0; j < pp; ++j) {
      cell[static_cast<Eigen::Index>(j)] += w * v[j];
    }
  }
  for (std::size_t d = 0; d < data_points_.size(); ++d) {
    Eigen::VectorXd& cell = out.at(grid.cell_of(data_points_[d]));
    const double* v = data_stats_.data() + d * pp;
    for (std::size_t j = 0; j < pp; ++j) {
      cell[static_cast<Eigen::Index>(j)] -= v[j];
    }
  }
  return out;
}

double LplEvaluator::gnz_residual(std::span<const double> theta,
                                  int stat_index) const {
  if (stat_index >= p_) {
    raise(ErrorCode::invalid_input, "statistic index out of range");
  }
  double value = 0.0;
  Eigen::VectorXd grad;
  derivatives(theta, &value, &grad, nullptr);
  if (stat_index < 0) {
    // g == 1: data count minus integral of e^{-V}.
    double data_term = 0.0;
    for (std::size_t c = 0; c < static_cast<std::size_t>(p_); ++c) {
      data_term += theta[c] * data_sum_[static_cast<Eigen::Index>(c)];
    }
    const double integral = -value - data_term;
    return static_cast<double>(data_count()) - integral;
  }
  // g == v_j: exactly the negated gradient component.
  return -grad[stat_index];
}

double lpl(const ModelSpec& model, std::span<const double> theta,
           const PointPattern& pattern, const Window& fit_window,
           const QuadratureScheme& quad) {
  check_theta_strict(model, theta);
  return LplEvaluator(model, pattern, fit_window, quad).lpl(theta);
}

Eigen::VectorXd lpl_gradient(const ModelSpec& model,
                             std::span<const double> theta,
                             const PointPattern& pattern,
                             const Window& fit_window,
                             const QuadratureScheme& quad) {
  check_theta_strict(model, theta);
  return LplEvaluator(model, pattern, fit_window, quad).gradient(theta);
}

Eigen::MatrixXd lpl_hessian(const ModelSpec& model,
                            std::span<const double> theta,
                            const PointPattern& pattern,
                            const Window& fit_window,
                            const QuadratureScheme& quad) {
  check_theta_strict(model, theta);
  return LplEvaluator(model, pattern, fit_window, quad).hessian(theta);
}

std::map<CellIndex, Eigen::VectorXd> cell_gradients(
    const ModelSpec& model, std::span<const double> theta,
    const PointPattern& pattern, const Window& fit_window, double cell_size,
    const QuadratureScheme& quad) {
  check_theta_strict(model, theta);
  return LplEvaluator(model, pattern, fit_window, quad)
      .cell_gradients(theta, cell_size);
}

}  // namespace gibbsfit
