#include "quadrature.hpp"

#include <cmath>
#include <numbers>

#include "grid_index.hpp"
#include "sums.hpp"

namespace gibbsfit {

void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) raise(ErrorCode::invalid_input, "need at least one node");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre polynomial and derivative by recurrence.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    nodes[static_cast<std::size_t>(i)] = -x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

QuadratureScheme build_quadrature(const Window& fit_window,
                                  const MarkSpace& marks, int nx, int ny,
                                  int mark_nodes) {
  if (nx < 2 || ny < 2) {
    raise(ErrorCode::invalid_input, "spatial grid needs at least 2x2 nodes");
  }
  QuadratureScheme q;
  q.window = fit_window;
  q.nx = nx;
  q.ny = ny;
  q.spatial_weight = fit_window.area() / (static_cast<double>(nx) * ny);
  switch (marks.kind) {
    case MarkKind::unit:
      q.mark_nodes = {0.0};
      q.mark_weights = {1.0};
      break;
    case MarkKind::finite:
      for (int m = 1; m <= marks.count; ++m) {
        q.mark_nodes.push_back(static_cast<double>(m));
        q.mark_weights.push_back(1.0 / marks.count);
      }
      break;
    case MarkKind::interval: {
      if (mark_nodes < 1) {
        raise(ErrorCode::invalid_input,
              "continuous marks need at least one mark node");
      }
      std::vector<double> t, w;
      gauss_legendre(mark_nodes, t, w);
      for (int i = 0; i < mark_nodes; ++i) {
        q.mark_nodes.push_back(marks.max * (t[static_cast<std::size_t>(i)] + 1.0) /
                               2.0);
        q.mark_weights.push_back(w[static_cast<std::size_t>(i)] / 2.0);
      }
      break;
    }
  }
  return q;
}

std::vector<double> integrate_papangelou(const PapangelouIntegrand& g,
                                         int g_dim, const ModelSpec& model,
                                         std::span<const double> theta,
                                         const PointPattern& pattern,
                                         const QuadratureScheme& quad) {
  const ThetaCheck check = validate_theta(model, theta);
  if (!check.ok) raise(ErrorCode::invalid_parameter, check.message);
  const std::size_t p = static_cast<std::size_t>(model.dimension());
  const double D = model.interaction_range();
  PointGrid index(pattern.points(), D);

  std::vector<double> total(static_cast<std::size_t>(g_dim), 0.0);
  std::vector<double> gval(static_cast<std::size_t>(g_dim), 0.0);
  StatValue stats;
  stats.v.resize(p);
  std::vector<MarkedPoint> nbrs;

  for (std::size_t s = 0; s < quad.spatial_count(); ++s) {
    const Point loc = quad.spatial_node(s);
    nbrs.clear();
    index.for_neighbours(loc, D, [&](std::size_t, const MarkedPoint& y) {
      nbrs.push_back(y);
    });
    for (std::size_t mk = 0; mk < quad.mark_count(); ++mk) {
      MarkedPoint xm{loc.x, loc.y, quad.mark_nodes[mk]};
      stats.hard_core = local_statistics_into(model, xm, nbrs, stats.v);
      if (stats.hard_core) continue;
      double energy = 0.0;
      for (std::size_t c = 0; c < p; ++c) energy += theta[c] * stats.v[c];
      const double factor =
          quad.spatial_weight * quad.mark_weights[mk] * std::exp(-energy);
      g(xm, stats, gval);
      for (std::size_t c = 0; c < total.size(); ++c) {
        const double summand = factor * gval[c];
        if (!std::isfinite(summand)) {
          raise(ErrorCode::numeric,
                "non-finite summand at spatial node " + std::to_string(s) +
                    ", mark node " + std::to_string(mk));
        }
        total[c] += summand;
      }
    }
  }
  return total;
}

}  // namespace gibbsfit
