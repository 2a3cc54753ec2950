#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "geometry.hpp"

namespace gibbsfit {

enum class MarkKind { unit, finite, interval };

/// Mark space with its reference probability measure: a point mass (unit),
/// the uniform measure on {1..M} (finite), or the uniform density on
/// [0, max] (interval).
struct MarkSpace {
  MarkKind kind = MarkKind::unit;
  int count = 1;      // finite: number of labels M
  double max = 0.0;   // interval: upper end M_max

  static MarkSpace unit() { return MarkSpace{}; }
  static MarkSpace finite(int m);
  static MarkSpace interval(double m_max);

  bool mark_valid(double mark) const;
  bool operator==(const MarkSpace&) const = default;
};

struct MarkedPoint {
  double x = 0.0;
  double y = 0.0;
  double mark = 0.0;  // unit: 0; finite: integer label in {1..M}; interval: [0, max]

  Point location() const { return Point{x, y}; }
};

/// Immutable finite marked configuration restricted to an observation
/// window. All points lie inside the window (closed), marks are valid for
/// the declared space, and duplicate locations are rejected.
class PointPattern {
 public:
  PointPattern(std::vector<MarkedPoint> points, Window window,
               MarkSpace marks);

  std::span<const MarkedPoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Window& window() const { return window_; }
  const MarkSpace& mark_space() const { return marks_; }
  const MarkedPoint& operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<MarkedPoint> points_;
  Window window_;
  MarkSpace marks_;
};

/// Points of the pattern whose location lies in `region` (closed), with the
/// same mark space; the result window is the region.
PointPattern restrict(const PointPattern& pattern, const Window& region);

/// Shrinks the window by D on every side. Throws WindowTooSmall when the
/// result degenerates.
Window erode_window(const Window& window, double D);

}  // namespace gibbsfit
