#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace gibbsfit {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double distance(const Point& a, const Point& b);

/// Axis-aligned rectangular observation window. Sides must have positive
/// length; area is the Lebesgue measure of the rectangle.
struct Window {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  Window() = default;
  Window(double x0, double x1, double y0, double y1);

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool contains(const Point& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  bool contains(const Window& other) const {
    return other.xmin >= xmin && other.xmax <= xmax && other.ymin >= ymin &&
           other.ymax <= ymax;
  }
};

/// Integer index of a grid cell. Cell (i1, i2) at size d is the half-open
/// square [d(i1-1/2), d(i1+1/2)) x [d(i2-1/2), d(i2+1/2)), so every point
/// belongs to exactly one cell.
struct CellIndex {
  std::int64_t i1 = 0;
  std::int64_t i2 = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Maps a point to the unique cell containing it at cell size d.
CellIndex cell_index(const Point& p, double d);

/// A window tiled exactly by size-d cells. The lattice is anchored to the
/// window (shifted so the window boundary falls on cell edges) with indices
/// chosen so the central cell sits near (0, 0); for windows already aligned
/// with the absolute lattice the anchor shift is exactly zero and cell_of
/// agrees with cell_index. Only index differences enter downstream block
/// sums, so the anchor choice does not affect covariance estimates.
class CellGrid {
 public:
  /// Throws MisalignedWindow unless both sides are integer multiples of d
  /// (relative tolerance 1e-9); the caller must snap the window first.
  CellGrid(const Window& window, double d);

  double cell_size() const { return d_; }
  const Window& window() const { return window_; }
  std::int64_t cells_x() const { return n1_; }
  std::int64_t cells_y() const { return n2_; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(n1_) * static_cast<std::size_t>(n2_);
  }

  /// Cell containing p. Points on the closed upper window edge are clamped
  /// into the last cell so the closed window is covered.
  CellIndex cell_of(const Point& p) const;
  bool contains(const CellIndex& c) const;
  std::vector<CellIndex> cells() const;

 private:
  Window window_;
  double d_ = 0.0;
  double shift_x_ = 0.0;
  double shift_y_ = 0.0;
  std::int64_t i1_lo_ = 0, i2_lo_ = 0;
  std::int64_t n1_ = 0, n2_ = 0;
};

/// Convenience wrapper: indices of the cells tiling `window` at size d.
std::vector<CellIndex> cell_partition(const Window& window, double d);

/// Area of the intersection of two discs of radius `radius` whose centers
/// are `dist` apart. Zero once dist >= 2*radius.
double circle_circle_overlap(double dist, double radius);

/// Overlap area |B(0, R/2) n B(x, R/2)| for ||x|| = r: the pair kernel of
/// the overlap-area interaction. Equals (R^2 acos(r/R) - r sqrt(R^2-r^2))/2
/// for r <= R and 0 beyond; ranges over [0, pi R^2 / 4].
double disc_overlap_area(double r, double R);

/// Area of disc(center, radius) intersected with [x0,x1] x [y0,y1].
double circle_box_area(const Point& center, double radius, double x0,
                       double x1, double y0, double y1);

/// Area of B(new_center, R) not covered by the discs B(x, R), x in existing.
/// Only existing centers within 2R of new_center can affect the result; the
/// rest are ignored before any arithmetic so the output is bit-identical
/// under appending far points. Deterministic adaptive subdivision, absolute
/// error below 1e-6 * pi R^2.
double added_disc_area(const Point& new_center, double R,
                       std::span<const Point> existing);

/// Symmetrized k-nearest-neighbour graph: edge {a, b} present iff b is among
/// the k nearest neighbours of a or a among the k nearest of b. Distance
/// ties are broken by lexicographic (x, y) order of the candidate, so the
/// graph is a deterministic function of the point set. Returns index pairs
/// (a < b) in lexicographic order. Throws InvalidInput on duplicate points.
std::vector<std::pair<std::size_t, std::size_t>> knn_graph(
    std::span<const Point> points, int k);

/// Index of a point's k nearest neighbours (same tie rule as knn_graph),
/// in selection order. Used by the directed neighbour statistics.
void k_nearest(std::span<const Point> points, std::size_t self, int k,
               std::vector<std::size_t>& out);

}  // namespace gibbsfit
