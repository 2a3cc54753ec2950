#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

namespace gibbsfit {

double distance(const Point& a, const Point& b) {
  return std::sqrt(squared_distance(a, b));
}

Window::Window(double x0, double x1, double y0, double y1)
    : xmin(x0), xmax(x1), ymin(y0), ymax(y1) {
  if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(y0) ||
      !std::isfinite(y1)) {
    raise(ErrorCode::invalid_input, "window coordinates must be finite");
  }
  if (!(xmax > xmin) || !(ymax > ymin)) {
    raise(ErrorCode::window_too_small,
          "window sides must have positive length");
  }
}

CellIndex cell_index(const Point& p, double d) {
  if (!(d > 0.0)) raise(ErrorCode::invalid_input, "cell size must be > 0");
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    raise(ErrorCode::invalid_input, "point coordinates must be finite");
  }
  return CellIndex{static_cast<std::int64_t>(std::floor(p.x / d + 0.5)),
                   static_cast<std::int64_t>(std::floor(p.y / d + 0.5))};
}

namespace {

std::int64_t side_cell_count(double lo, double hi, double d,
                             const char* axis) {
  const double len = hi - lo;
  const double m = std::round(len / d);
  if (m < 1.0 ||
      std::abs(len - m * d) > 1e-9 * std::max({1.0, len, d})) {
    raise(ErrorCode::misaligned_window,
          std::string("window ") + axis +
              "-side is not an integer multiple of the cell size; snap the "
              "window first");
  }
  return static_cast<std::int64_t>(m);
}

}  // namespace

CellGrid::CellGrid(const Window& window, double d) : window_(window), d_(d) {
  if (!(d > 0.0)) raise(ErrorCode::invalid_input, "cell size must be > 0");
  n1_ = side_cell_count(window.xmin, window.xmax, d, "x");
  n2_ = side_cell_count(window.ymin, window.ymax, d, "y");
  i1_lo_ = -(n1_ / 2);
  i2_lo_ = -(n2_ / 2);
  shift_x_ = window.xmin - d * (static_cast<double>(i1_lo_) - 0.5);
  shift_y_ = window.ymin - d * (static_cast<double>(i2_lo_) - 0.5);
}

CellIndex CellGrid::cell_of(const Point& p) const {
  CellIndex c = cell_index(Point{p.x - shift_x_, p.y - shift_y_}, d_);
  c.i1 = std::clamp(c.i1, i1_lo_, i1_lo_ + n1_ - 1);
  c.i2 = std::clamp(c.i2, i2_lo_, i2_lo_ + n2_ - 1);
  return c;
}

bool CellGrid::contains(const CellIndex& c) const {
  return c.i1 >= i1_lo_ && c.i1 < i1_lo_ + n1_ && c.i2 >= i2_lo_ &&
         c.i2 < i2_lo_ + n2_;
}

std::vector<CellIndex> CellGrid::cells() const {
  std::vector<CellIndex> out;
  out.reserve(cell_count());
  for (std::int64_t i = i1_lo_; i < i1_lo_ + n1_; ++i) {
    for (std::int64_t j = i2_lo_; j < i2_lo_ + n2_; ++j) {
      out.push_back(CellIndex{i, j});
    }
  }
  return out;
}

std::vector<CellIndex> cell_partition(const Window& window, double d) {
  return CellGrid(window, d).cells();
}

double circle_circle_overlap(double dist, double radius) {
  if (!(radius > 0.0) || dist < 0.0) {
    raise(ErrorCode::invalid_input, "need dist >= 0 and radius > 0");
  }
  if (dist >= 2.0 * radius) return 0.0;
  if (dist == 0.0) return std::numbers::pi * radius * radius;
  const double half = dist / 2.0;
  return 2.0 * radius * radius * std::acos(half / radius) -
         half * std::sqrt(4.0 * radius * radius - dist * dist);
}

double disc_overlap_area(double r, double R) {
  if (!(R > 0.0) || r < 0.0 || !std::isfinite(r)) {
    raise(ErrorCode::invalid_input, "need r >= 0 and R > 0");
  }
  if (r >= R) return 0.0;
  return 0.5 * (R * R * std::acos(r / R) - r * std::sqrt(R * R - r * r));
}

namespace {

// Antiderivative of sqrt(R^2 - u^2); odd in u.
double half_chord_integral(double u, double R) {
  u = std::clamp(u, -R, R);
  return 0.5 * (u * std::sqrt(std::max(0.0, R * R - u * u)) +
                R * R * std::asin(u / R));
}

// Area of disc(0, R) intersected with the quadrant (-inf, x] x (-inf, y].
double disc_corner_area(double x, double y, double R) {
  if (x <= -R || y <= -R) return 0.0;
  x = std::min(x, R);
  y = std::min(y, R);
  const auto H = [R](double t) { return half_chord_integral(t, R); };
  if (y >= 0.0) {
    const double c = std::sqrt(std::max(0.0, R * R - y * y));
    if (x <= -c) return 2.0 * (H(x) - H(-R));
    double area = 2.0 * (H(-c) - H(-R));
    const double m = std::min(x, c);
    area += H(m) - H(-c) + y * (m + c);
    if (x > c) area += 2.0 * (H(x) - H(c));
    return area;
  }
  const double c = std::sqrt(std::max(0.0, R * R - y * y));
  if (x <= -c) return 0.0;
  const double m = std::min(x, c);
  return H(m) - H(-c) + y * (m + c);
}

}  // namespace

double circle_box_area(const Point& center, double radius, double x0,
                       double x1, double y0, double y1) {
  if (!(radius > 0.0)) return 0.0;
  const double a = x0 - center.x, b = x1 - center.x;
  const double c = y0 - center.y, d = y1 - center.y;
  return disc_corner_area(b, d, radius) - disc_corner_area(a, d, radius) -
         disc_corner_area(b, c, radius) + disc_corner_area(a, c, radius);
}

namespace {

struct Box {
  double x0 = 0.0, y0 = 0.0, size = 0.0;
  double area() const { return size * size; }
  double x1() const { return x0 + size; }
  double y1() const { return y0 + size; }
};

double box_min_dist2(const Point& p, const Box& b) {
  const double dx = std::max({b.x0 - p.x, 0.0, p.x - b.x1()});
  const double dy = std::max({b.y0 - p.y, 0.0, p.y - b.y1()});
  return dx * dx + dy * dy;
}

double box_max_dist2(const Point& p, const Box& b) {
  const double dx = std::max(p.x - b.x0, b.x1() - p.x);
  const double dy = std::max(p.y - b.y0, b.y1() - p.y);
  return dx * dx + dy * dy;
}

}  // namespace

double added_disc_area(const Point& new_center, double R,
                       std::span<const Point> existing) {
  if (!(R > 0.0)) raise(ErrorCode::invalid_input, "disc radius must be > 0");
  const double r2 = R * R;
  const double full = std::numbers::pi * r2;

  // Locality: only centers within 2R can touch the new disc. Filtering
  // first keeps the result bit-identical when far points are appended.
  std::vector<Point> near;
  for (const Point& p : existing) {
    const double d2 = squared_distance(new_center, p);
    if (d2 == 0.0) return 0.0;
    if (d2 < 4.0 * r2) near.push_back(p);
  }
  if (near.empty()) return full;
  if (near.size() == 1) {
    return full - circle_circle_overlap(distance(new_center, near[0]), R);
  }

  const double tol = 1e-6 * full;
  const double min_size = 2.0 * R * 0x1p-45;
  double decided = 0.0;
  double undecided = 4.0 * r2;
  std::deque<Box> frontier;
  frontier.push_back(Box{new_center.x - R, new_center.y - R, 2.0 * R});

  while (!frontier.empty() && undecided >= 2.0 * tol) {
    Box box = frontier.front();
    frontier.pop_front();
    undecided -= box.area();

    if (box_min_dist2(new_center, box) >= r2) continue;  // outside new disc
    bool covered = false;
    for (const Point& p : near) {
      if (box_max_dist2(p, box) <= r2) {
        covered = true;
        break;
      }
    }
    if (covered) continue;

    const bool new_crosses = box_max_dist2(new_center, box) > r2;
    int crossing = 0;
    const Point* crossing_center = nullptr;
    for (const Point& p : near) {
      if (box_min_dist2(p, box) < r2) {  // not covered, so boundary crosses
        ++crossing;
        crossing_center = &p;
        if (crossing > 1) break;
      }
    }

    if (crossing == 0) {
      decided += new_crosses ? circle_box_area(new_center, R, box.x0,
                                               box.x1(), box.y0, box.y1())
                             : box.area();
    } else if (crossing == 1 && !new_crosses) {
      decided += box.area() - circle_box_area(*crossing_center, R, box.x0,
                                              box.x1(), box.y0, box.y1());
    } else if (box.size <= min_size) {
      decided += 0.5 * circle_box_area(new_center, R, box.x0, box.x1(),
                                       box.y0, box.y1());
    } else {
      const double h = box.size / 2.0;
      frontier.push_back(Box{box.x0, box.y0, h});
      frontier.push_back(Box{box.x0 + h, box.y0, h});
      frontier.push_back(Box{box.x0, box.y0 + h, h});
      frontier.push_back(Box{box.x0 + h, box.y0 + h, h});
      undecided += box.area();
    }
  }
  for (const Box& box : frontier) {
    decided +=
        0.5 * circle_box_area(new_center, R, box.x0, box.x1(), box.y0, box.y1());
  }
  return std::clamp(decided, 0.0, full);
}

namespace {

struct Candidate {
  double d2;
  double x;
  double y;
  std::size_t index;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.d2 != b.d2) return a.d2 < b.d2;
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

}  // namespace

void k_nearest(std::span<const Point> points, std::size_t self, int k,
               std::vector<std::size_t>& out) {
  out.clear();
  std::vector<Candidate> cands;
  cands.reserve(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (j == self) continue;
    cands.push_back(Candidate{squared_distance(points[self], points[j]),
                              points[j].x, points[j].y, j});
  }
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k),
                                                 cands.size());
  std::partial_sort(cands.begin(), cands.begin() + take, cands.end(),
                    candidate_less);
  for (std::size_t j = 0; j < take; ++j) out.push_back(cands[j].index);
}

std::vector<std::pair<std::size_t, std::size_t>> knn_graph(
    std::span<const Point> points, int k) {
  if (k < 1) raise(ErrorCode::invalid_input, "k must be >= 1");
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (points[i].x == points[j].x && points[i].y == points[j].y) {
        raise(ErrorCode::invalid_input,
              "duplicate points make nearest-neighbour ranks undefined");
      }
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> nbrs;
  for (std::size_t i = 0; i < n; ++i) {
    k_nearest(points, i, k, nbrs);
    for (std::size_t j : nbrs) {
      edges.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace gibbsfit
