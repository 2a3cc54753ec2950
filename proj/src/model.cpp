#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gibbsfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int pair_index(int m1, int m2, int marks) {
  // upper-triangle order (1,1), (1,2), ..., (1,M), (2,2), ...
  return (m1 - 1) * (marks + 1) - m1 * (m1 - 1) / 2 + (m2 - m1);
}

/// Band containing distance d in the grid, 1-based; 0 when d falls in no
/// band. Band 1 is [D_1, D_2], band b >= 2 is (D_b, D_{b+1}].
int band_of(const PairGrid& grid, double d) {
  const auto& r = grid.radii;
  if (d < r.front() || d > r.back()) return 0;
  if (d == r.front()) return 1;
  const auto it = std::lower_bound(r.begin(), r.end(), d);
  return static_cast<int>(it - r.begin());
}

void check_grid(const PairGrid& grid) {
  if (grid.radii.size() < 2) {
    raise(ErrorCode::invalid_input, "range grid needs at least two radii");
  }
  if (!(grid.radii.front() >= 0.0)) {
    raise(ErrorCode::invalid_input, "range grid must start at D1 >= 0");
  }
  for (std::size_t i = 0; i < grid.radii.size(); ++i) {
    if (!std::isfinite(grid.radii[i])) {
      raise(ErrorCode::invalid_input, "range grid radii must be finite");
    }
    if (i > 0 && !(grid.radii[i] > grid.radii[i - 1])) {
      raise(ErrorCode::invalid_input,
            "range grid radii must be strictly increasing");
    }
  }
}

std::string band_name(int m1, int m2, const PairGrid& grid, int band) {
  return "pair[" + std::to_string(m1) + "," + std::to_string(m2) + "] band(" +
         std::to_string(grid.radii[band - 1]) + "," +
         std::to_string(grid.radii[band]) + "]";
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::poisson: return "poisson";
    case Family::overlap_area: return "overlap_area";
    case Family::multi_strauss: return "multi_strauss";
    case Family::knn_multi_strauss: return "knn_multi_strauss";
    case Family::strauss_disc: return "strauss_disc";
    case Family::geyer_triplet: return "geyer_triplet";
    case Family::area_interaction: return "area_interaction";
  }
  return "?";
}

std::optional<Family> family_from_name(const std::string& name) {
  for (Family f :
       {Family::poisson, Family::overlap_area, Family::multi_strauss,
        Family::knn_multi_strauss, Family::strauss_disc,
        Family::geyer_triplet, Family::area_interaction}) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

ModelSpec ModelSpec::poisson() {
  ModelSpec m;
  m.family_ = Family::poisson;
  m.range_ = 0.0;
  m.marks_ = MarkSpace::unit();
  m.components_ = {ComponentInfo{"n", false, false, true, 1.0, 0.0, 0}};
  return m;
}

ModelSpec ModelSpec::overlap_area(double R) {
  if (!(R > 0.0)) raise(ErrorCode::invalid_input, "overlap_area needs R > 0");
  ModelSpec m;
  m.family_ = Family::overlap_area;
  m.R_ = R;
  m.range_ = R;
  m.marks_ = MarkSpace::unit();
  m.components_ = {
      ComponentInfo{"n", false, false, true, 1.0, 0.0, 0},
      ComponentInfo{"overlap", true, false, false,
                    std::numbers::pi * R * R / 4.0, 0.0, 1},
  };
  return m;
}

ModelSpec ModelSpec::strauss_disc(double mark_max) {
  if (!(mark_max > 0.0)) {
    raise(ErrorCode::invalid_input, "strauss_disc needs M_max > 0");
  }
  ModelSpec m;
  m.family_ = Family::strauss_disc;
  m.mark_max_ = mark_max;
  // Two discs of radii m1, m2 <= M_max interact up to distance m1 + m2.
  m.range_ = 2.0 * mark_max;
  m.marks_ = MarkSpace::interval(mark_max);
  m.components_ = {
      ComponentInfo{"n", false, false, true, 1.0, 0.0, 0},
      ComponentInfo{"close_pairs", true, false, false, 1.0, 0.0, 1},
  };
  return m;
}

ModelSpec ModelSpec::geyer_triplet(double R) {
  if (!(R > 0.0)) raise(ErrorCode::invalid_input, "geyer_triplet needs R > 0");
  ModelSpec m;
  m.family_ = Family::geyer_triplet;
  m.R_ = R;
  m.range_ = R;
  m.marks_ = MarkSpace::unit();
  m.components_ = {
      ComponentInfo{"n", false, false, true, 1.0, 0.0, 0},
      ComponentInfo{"pairs", false, false, false, 1.0, 0.0, 1},
      ComponentInfo{"triplets", true, true, false, 1.0, 0.0, 2},
  };
  return m;
}

ModelSpec ModelSpec::area_interaction(double R) {
  if (!(R > 0.0)) {
    raise(ErrorCode::invalid_input, "area_interaction needs R > 0");
  }
  ModelSpec m;
  m.family_ = Family::area_interaction;
  m.R_ = R;
  m.range_ = 2.0 * R;
  m.marks_ = MarkSpace::unit();
  m.components_ = {
      ComponentInfo{"n", false, false, true, 1.0, 0.0, 0},
      ComponentInfo{"added_area", false, false, false,
                    std::numbers::pi * (2.0 * R) * (2.0 * R), 0.0, 0},
  };
  return m;
}

void ModelSpec::build_pair_layout() {
  const int M = mark_count_;
  const bool knn = family_ == Family::knn_multi_strauss;
  double max_radius = 0.0;
  double delta = -1.0;
  bool any_soft = false;
  for (const PairGrid& g : grids_) {
    check_grid(g);
    max_radius = std::max(max_radius, g.radii.back());
    if (!knn) {
      if (g.radii.front() > 0.0) {
        if (delta > 0.0 && g.radii.front() != delta) {
          raise(ErrorCode::invalid_input,
                "hard-core radii must be the same for every mark pair");
        }
        delta = g.radii.front();
      } else {
        any_soft = true;
      }
    }
  }
  if (!knn && delta > 0.0 && any_soft) {
    raise(ErrorCode::invalid_input,
          "mixing hard-core and non-hard-core pairs is not supported");
  }
  hard_core_delta_ = (!knn && delta > 0.0) ? delta : 0.0;
  range_ = knn ? 2.0 * max_radius : max_radius;

  const double pack =
      hard_core() ? std::pow(2.0 * range_ / hard_core_delta_ + 1.0, 2.0) : 0.0;
  const double knn_kappa = 13.0 * static_cast<double>(k_);

  count_offsets_.assign(M, 0);
  pair_offsets_.assign(grids_.size(), 0);
  components_.clear();
  for (int m1 = 1; m1 <= M; ++m1) {
    count_offsets_[m1 - 1] = static_cast<int>(components_.size());
    components_.push_back(ComponentInfo{
        M == 1 ? "n" : "n[" + std::to_string(m1) + "]", false, false, true,
        1.0, 0.0, 0});
    for (int m2 = m1; m2 <= M; ++m2) {
      const int pi = pair_index(m1, m2, M);
      const PairGrid& g = grids_[pi];
      pair_offsets_[pi] = static_cast<int>(components_.size());
      for (int b = 1; b <= g.bands(); ++b) {
        ComponentInfo info;
        info.name = band_name(m1, m2, g, b);
        info.is_count = false;
        if (knn) {
          info.nonnegative = false;
          info.kappa_sup = knn_kappa;
          info.kappa_inf = knn_kappa;
          info.power = 0;
        } else if (hard_core()) {
          info.nonnegative = false;
          info.kappa_sup = pack;
          info.kappa_inf = 0.0;
          info.power = 0;
        } else {
          info.nonnegative = true;
          info.kappa_sup = 1.0;
          info.kappa_inf = 0.0;
          info.power = 1;
        }
        components_.push_back(info);
      }
    }
  }
}

ModelSpec ModelSpec::multi_strauss(int marks, std::vector<PairGrid> grids) {
  if (marks < 1) raise(ErrorCode::invalid_input, "multi_strauss needs M >= 1");
  if (grids.size() != static_cast<std::size_t>(marks * (marks + 1) / 2)) {
    raise(ErrorCode::invalid_input,
          "multi_strauss needs one range grid per unordered mark pair");
  }
  ModelSpec m;
  m.family_ = Family::multi_strauss;
  m.mark_count_ = marks;
  m.marks_ = marks == 1 ? MarkSpace::unit() : MarkSpace::finite(marks);
  m.grids_ = std::move(grids);
  m.build_pair_layout();
  return m;
}

ModelSpec ModelSpec::knn_multi_strauss(int marks, std::vector<PairGrid> grids,
                                       int k) {
  if (marks < 1) raise(ErrorCode::invalid_input, "needs M >= 1");
  if (k < 1) raise(ErrorCode::invalid_input, "needs k >= 1");
  if (grids.size() != static_cast<std::size_t>(marks * (marks + 1) / 2)) {
    raise(ErrorCode::invalid_input,
          "knn_multi_strauss needs one range grid per unordered mark pair");
  }
  ModelSpec m;
  m.family_ = Family::knn_multi_strauss;
  m.mark_count_ = marks;
  m.k_ = k;
  m.marks_ = marks == 1 ? MarkSpace::unit() : MarkSpace::finite(marks);
  m.grids_ = std::move(grids);
  m.build_pair_layout();
  return m;
}

int ModelSpec::count_component(int mark) const {
  return count_offsets_.at(static_cast<std::size_t>(mark - 1));
}

int ModelSpec::pair_component(int m1, int m2, int band) const {
  if (m1 > m2) std::swap(m1, m2);
  return pair_offsets_.at(
             static_cast<std::size_t>(pair_index(m1, m2, mark_count_))) +
         band - 1;
}

const PairGrid& ModelSpec::grid(int m1, int m2) const {
  if (m1 > m2) std::swap(m1, m2);
  return grids_.at(static_cast<std::size_t>(pair_index(m1, m2, mark_count_)));
}

ThetaCheck validate_theta(const ModelSpec& model, std::span<const double> theta,
                          bool closure) {
  if (theta.size() != static_cast<std::size_t>(model.dimension())) {
    raise(ErrorCode::invalid_parameter,
          "theta has dimension " + std::to_string(theta.size()) +
              ", model needs " + std::to_string(model.dimension()));
  }
  const auto& comps = model.components();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta[i])) {
      return ThetaCheck{false, static_cast<int>(i),
                        comps[i].name + ": non-finite value"};
    }
    if (comps[i].nonnegative) {
      if (theta[i] < 0.0) {
        return ThetaCheck{false, static_cast<int>(i),
                          comps[i].name + ": theta < 0"};
      }
      if (comps[i].strict && !closure && theta[i] == 0.0) {
        return ThetaCheck{false, static_cast<int>(i),
                          comps[i].name + ": theta = 0"};
      }
    }
  }
  return ThetaCheck{};
}

namespace {

// Unmarked configurations (mark 0) use label 1, matching M == 1 layouts.
int mark_label(const MarkedPoint& p) {
  const int label = static_cast<int>(p.mark);
  return label == 0 ? 1 : label;
}

// Directed neighbour-band counts: for every point a, each of its k nearest
// neighbours b contributes to the band of ||a-b|| for the mark pair
// {m_a, m_b}. Accumulates sign * count into out.
void knn_directed_counts(const ModelSpec& model,
                         std::span<const Point> locations,
                         std::span<const int> labels, double sign,
                         std::span<double> out) {
  const int k = model.neighbour_count();
  std::vector<std::size_t> nbrs;
  for (std::size_t a = 0; a < locations.size(); ++a) {
    k_nearest(locations, a, k, nbrs);
    for (std::size_t b : nbrs) {
      const double d = distance(locations[a], locations[b]);
      const PairGrid& g = model.grid(labels[a], labels[b]);
      const int band = band_of(g, d);
      if (band > 0) {
        out[static_cast<std::size_t>(
            model.pair_component(std::min(labels[a], labels[b]),
                                 std::max(labels[a], labels[b]), band))] +=
            sign;
      }
    }
  }
}

}  // namespace

bool local_statistics_into(const ModelSpec& model, const MarkedPoint& x,
                           std::span<const MarkedPoint> neighbours,
                           std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  bool hard = false;
  switch (model.family()) {
    case Family::poisson: {
      out[0] = 1.0;
      break;
    }
    case Family::overlap_area: {
      out[0] = 1.0;
      double sum = 0.0;
      for (const MarkedPoint& y : neighbours) {
        const double d = distance(x.location(), y.location());
        if (d < model.disc_radius()) {
          sum += disc_overlap_area(d, model.disc_radius());
        }
      }
      out[1] = sum;
      break;
    }
    case Family::strauss_disc: {
      out[0] = 1.0;
      double count = 0.0;
      for (const MarkedPoint& y : neighbours) {
        const double d = distance(x.location(), y.location());
        if (d <= x.mark + y.mark) count += 1.0;
      }
      out[1] = count;
      break;
    }
    case Family::geyer_triplet: {
      const double R = model.disc_radius();
      out[0] = 1.0;
      std::vector<Point> close;
      for (const MarkedPoint& y : neighbours) {
        if (distance(x.location(), y.location()) <= R) {
          close.push_back(y.location());
        }
      }
      out[1] = static_cast<double>(close.size());
      double triplets = 0.0;
      for (std::size_t i = 0; i < close.size(); ++i) {
        for (std::size_t j = i + 1; j < close.size(); ++j) {
          if (distance(close[i], close[j]) <= R) triplets += 1.0;
        }
      }
      out[2] = triplets;
      break;
    }
    case Family::area_interaction: {
      out[0] = 1.0;
      std::vector<Point> centers;
      centers.reserve(neighbours.size());
      for (const MarkedPoint& y : neighbours) centers.push_back(y.location());
      out[1] = added_disc_area(x.location(), model.disc_radius(), centers);
      break;
    }
    case Family::multi_strauss: {
      const int mx = mark_label(x);
      out[static_cast<std::size_t>(model.count_component(mx))] = 1.0;
      for (const MarkedPoint& y : neighbours) {
        const int my = mark_label(y);
        const PairGrid& g = model.grid(mx, my);
        const double d = distance(x.location(), y.location());
        if (d < g.radii.front()) {
          if (model.hard_core()) hard = true;
          continue;
        }
        const int band = band_of(g, d);
        if (band > 0) {
          out[static_cast<std::size_t>(model.pair_component(
              std::min(mx, my), std::max(mx, my), band))] += 1.0;
        }
      }
      break;
    }
    case Family::knn_multi_strauss: {
      const int mx = mark_label(x);
      out[static_cast<std::size_t>(model.count_component(mx))] = 1.0;
      const std::size_t n = neighbours.size();
      std::vector<Point> locations(n + 1);
      std::vector<int> labels(n + 1);
      for (std::size_t i = 0; i < n; ++i) {
        locations[i] = neighbours[i].location();
        labels[i] = mark_label(neighbours[i]);
      }
      locations[n] = x.location();
      labels[n] = mx;
      knn_directed_counts(model, std::span(locations).first(n),
                          std::span(labels).first(n), -1.0, out);
      knn_directed_counts(model, locations, labels, 1.0, out);
      break;
    }
  }
  return hard;
}

namespace {

std::vector<MarkedPoint> neighbours_of(const ModelSpec& model,
                                       const MarkedPoint& x,
                                       const PointPattern& pattern,
                                       bool* found_self) {
  const double D = model.interaction_range();
  const double d2max = D * D;
  std::vector<MarkedPoint> out;
  for (const MarkedPoint& y : pattern.points()) {
    if (y.x == x.x && y.y == x.y) {
      if (found_self) *found_self = true;
      continue;
    }
    if (squared_distance(x.location(), y.location()) <= d2max) {
      out.push_back(y);
    }
  }
  return out;
}

void check_mark_space(const ModelSpec& model, const PointPattern& pattern) {
  if (!(pattern.mark_space() == model.mark_space())) {
    raise(ErrorCode::model_data_mismatch,
          "pattern mark space does not match the model");
  }
}

}  // namespace

StatValue local_statistics(const ModelSpec& model, const MarkedPoint& x,
                           const PointPattern& pattern) {
  check_mark_space(model, pattern);
  if (!model.mark_space().mark_valid(x.mark)) {
    raise(ErrorCode::invalid_input, "mark of the inserted point is invalid");
  }
  bool self = false;
  const auto nbrs = neighbours_of(model, x, pattern, &self);
  if (self) {
    raise(ErrorCode::invalid_input,
          "inserted point already belongs to the configuration");
  }
  StatValue s;
  s.v.resize(static_cast<std::size_t>(model.dimension()));
  s.hard_core = local_statistics_into(model, x, nbrs, s.v);
  return s;
}

StatValue global_statistics(const ModelSpec& model,
                            const PointPattern& pattern) {
  check_mark_space(model, pattern);
  StatValue s;
  s.v.assign(static_cast<std::size_t>(model.dimension()), 0.0);
  const auto pts = pattern.points();
  const std::size_t n = pts.size();
  switch (model.family()) {
    case Family::poisson: {
      s.v[0] = static_cast<double>(n);
      break;
    }
    case Family::overlap_area: {
      s.v[0] = static_cast<double>(n);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          const double d = distance(pts[i].location(), pts[j].location());
          if (d < model.disc_radius()) {
            sum += disc_overlap_area(d, model.disc_radius());
          }
        }
      }
      s.v[1] = sum;
      break;
    }
    case Family::strauss_disc: {
      s.v[0] = static_cast<double>(n);
      double count = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          const double d = distance(pts[i].location(), pts[j].location());
          if (d <= pts[i].mark + pts[j].mark) count += 1.0;
        }
      }
      s.v[1] = count;
      break;
    }
    case Family::geyer_triplet: {
      const double R = model.disc_radius();
      s.v[0] = static_cast<double>(n);
      double pairs = 0.0, triplets = 0.0;
      std::vector<std::vector<std::size_t>> close(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (distance(pts[i].location(), pts[j].location()) <= R) {
            pairs += 1.0;
            close[i].push_back(j);
          }
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < close[i].size(); ++a) {
          for (std::size_t b = a + 1; b < close[i].size(); ++b) {
            if (distance(pts[close[i][a]].location(),
                         pts[close[i][b]].location()) <= R) {
              triplets += 1.0;
            }
          }
        }
      }
      s.v[1] = pairs;
      s.v[2] = triplets;
      break;
    }
    case Family::area_interaction: {
      s.v[0] = static_cast<double>(n);
      // Union area accumulated as the sum of successive added-disc areas, so
      // appending a point changes the value by exactly its local statistic.
      std::vector<Point> prefix;
      prefix.reserve(n);
      double area = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        area += added_disc_area(pts[i].location(), model.disc_radius(), prefix);
        prefix.push_back(pts[i].location());
      }
      s.v[1] = area;
      break;
    }
    case Family::multi_strauss: {
      for (std::size_t i = 0; i < n; ++i) {
        s.v[static_cast<std::size_t>(
            model.count_component(mark_label(pts[i])))] += 1.0;
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          const int mi = mark_label(pts[i]);
          const int mj = mark_label(pts[j]);
          const PairGrid& g = model.grid(mi, mj);
          const double d = distance(pts[i].location(), pts[j].location());
          if (d < g.radii.front()) {
            if (model.hard_core()) s.hard_core = true;
            continue;
          }
          const int band = band_of(g, d);
          if (band > 0) {
            s.v[static_cast<std::size_t>(model.pair_component(
                std::min(mi, mj), std::max(mi, mj), band))] += 1.0;
          }
        }
      }
      break;
    }
    case Family::knn_multi_strauss: {
      std::vector<Point> locations(n);
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        locations[i] = pts[i].location();
        labels[i] = mark_label(pts[i]);
        s.v[static_cast<std::size_t>(model.count_component(labels[i]))] += 1.0;
      }
      knn_directed_counts(model, locations, labels, 1.0, s.v);
      break;
    }
  }
  return s;
}

double local_energy(const ModelSpec& model, std::span<const double> theta,
                    const MarkedPoint& x, const PointPattern& pattern) {
  const ThetaCheck check = validate_theta(model, theta);
  if (!check.ok) raise(ErrorCode::invalid_parameter, check.message);
  const StatValue s = local_statistics(model, x, pattern);
  if (s.hard_core) return kInf;
  double e = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) e += theta[i] * s.v[i];
  return e;
}

double stability_bound(const ModelSpec& model, std::span<const double> theta) {
  const ThetaCheck check = validate_theta(model, theta);
  if (!check.ok) raise(ErrorCode::invalid_parameter, check.message);

  if (model.family() == Family::geyer_triplet && theta[1] < 0.0) {
    // Geyer with attractive pairs: the triplet term dominates. Neighbours of
    // the origin sit in B(0, R), which 16 squares of side R/2 cover; any two
    // points in one square are within R, so n neighbours force at least
    // n(n-16)/32 triangles through the origin.
    const double t2 = theta[1], t3 = theta[2];
    const auto g = [&](double nv) {
      return t2 * nv + t3 * std::max(0.0, nv * (nv - 16.0) / 32.0);
    };
    const double vertex = 8.0 - 16.0 * t2 / t3;
    double worst = std::min(g(16.0), g(std::max(16.0, vertex)));
    worst = std::min(worst, 0.0);
    return std::max(0.0, -(theta[0] + worst));
  }

  const auto& comps = model.components();
  double lower_count = kInf;
  double lower_interaction = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].is_count) {
      lower_count = std::min(lower_count, theta[i]);
    } else if (comps[i].kappa_inf > 0.0) {
      lower_interaction -= std::abs(theta[i]) *
                           std::max(comps[i].kappa_inf, comps[i].kappa_sup);
    } else if (comps[i].power == 0) {
      lower_interaction += std::min(0.0, theta[i]) * comps[i].kappa_sup;
    }
    // power >= 1 components are constrained to theta >= 0 and v >= 0 here.
  }
  return std::max(0.0, -(lower_count + lower_interaction));
}

}  // namespace gibbsfit
