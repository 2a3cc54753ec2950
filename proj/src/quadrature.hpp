#pragma once

#include <functional>
#include <span>
#include <vector>

#include "model.hpp"
#include "pattern.hpp"

namespace gibbsfit {

/// Deterministic approximation of integrals over window x mark space
/// against Lebesgue x mark-probability measure: the midpoint rule on an
/// nx x ny grid crossed with mark nodes whose weights sum to one.
struct QuadratureScheme {
  Window window;
  int nx = 0;
  int ny = 0;
  double spatial_weight = 0.0;  // |window| / (nx * ny)
  std::vector<double> mark_nodes;
  std::vector<double> mark_weights;

  std::size_t spatial_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  std::size_t mark_count() const { return mark_nodes.size(); }
  std::size_t node_count() const { return spatial_count() * mark_count(); }

  Point spatial_node(std::size_t flat) const {
    const std::size_t i = flat % static_cast<std::size_t>(nx);
    const std::size_t j = flat / static_cast<std::size_t>(nx);
    const double hx = window.width() / nx;
    const double hy = window.height() / ny;
    return Point{window.xmin + (static_cast<double>(i) + 0.5) * hx,
                 window.ymin + (static_cast<double>(j) + 0.5) * hy};
  }
};

/// Midpoint spatial rule; marks get a single unit node, M uniform nodes, or
/// G Gauss-Legendre nodes on [0, M_max] scaled to probability weights.
QuadratureScheme build_quadrature(const Window& fit_window,
                                  const MarkSpace& marks, int nx, int ny,
                                  int mark_nodes);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);

/// Integrand value(s) g(x^m, phi) given the local statistics of x^m.
using PapangelouIntegrand = std::function<void(
    const MarkedPoint&, const StatValue&, std::span<double>)>;

/// Sum over quadrature nodes of w g(x^m, phi) e^{-V(x^m|phi;theta)}.
/// Hard-core nodes contribute zero. Throws a numeric error naming the node
/// when a summand is not finite.
std::vector<double> integrate_papangelou(const PapangelouIntegrand& g,
                                         int g_dim, const ModelSpec& model,
                                         std::span<const double> theta,
                                         const PointPattern& pattern,
                                         const QuadratureScheme& quad);

}  // namespace gibbsfit
