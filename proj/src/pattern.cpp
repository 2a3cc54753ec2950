#include "pattern.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

namespace gibbsfit {

MarkSpace MarkSpace::finite(int m) {
  if (m < 1) raise(ErrorCode::invalid_input, "finite mark space needs M >= 1");
  MarkSpace s;
  s.kind = MarkKind::finite;
  s.count = m;
  return s;
}

MarkSpace MarkSpace::interval(double m_max) {
  if (!(m_max > 0.0) || !std::isfinite(m_max)) {
    raise(ErrorCode::invalid_input, "interval mark space needs M_max > 0");
  }
  MarkSpace s;
  s.kind = MarkKind::interval;
  s.max = m_max;
  return s;
}

bool MarkSpace::mark_valid(double mark) const {
  switch (kind) {
    case MarkKind::unit:
      return mark == 0.0;
    case MarkKind::finite:
      return mark == std::floor(mark) && mark >= 1.0 &&
             mark <= static_cast<double>(count);
    case MarkKind::interval:
      return std::isfinite(mark) && mark >= 0.0 && mark <= max;
  }
  return false;
}

PointPattern::PointPattern(std::vector<MarkedPoint> points, Window window,
                           MarkSpace marks)
    : points_(std::move(points)), window_(window), marks_(marks) {
  struct Loc {
    double x, y;
    bool operator==(const Loc&) const = default;
  };
  struct LocHash {
    std::size_t operator()(const Loc& l) const {
      std::hash<double> h;
      return h(l.x) * 1000003u ^ h(l.y);
    }
  };
  std::unordered_map<Loc, std::size_t, LocHash> seen;
  seen.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const MarkedPoint& p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      raise(ErrorCode::invalid_input,
            "point " + std::to_string(i) + " has non-finite coordinates");
    }
    if (!window_.contains(p.location())) {
      raise(ErrorCode::invalid_input,
            "point " + std::to_string(i) + " lies outside the window");
    }
    if (!marks_.mark_valid(p.mark)) {
      raise(ErrorCode::invalid_input,
            "point " + std::to_string(i) + " has an invalid mark");
    }
    auto [it, inserted] = seen.emplace(Loc{p.x, p.y}, i);
    if (!inserted) {
      raise(ErrorCode::invalid_input,
            "duplicate location at points " + std::to_string(it->second) +
                " and " + std::to_string(i));
    }
  }
}

PointPattern restrict(const PointPattern& pattern, const Window& region) {
  std::vector<MarkedPoint> kept;
  for (const MarkedPoint& p : pattern.points()) {
    if (region.contains(p.location())) kept.push_back(p);
  }
  return PointPattern(std::move(kept), region, pattern.mark_space());
}

Window erode_window(const Window& window, double D) {
  if (D < 0.0) raise(ErrorCode::invalid_input, "erosion distance must be >= 0");
  const double x0 = window.xmin + D, x1 = window.xmax - D;
  const double y0 = window.ymin + D, y1 = window.ymax - D;
  if (!(x1 > x0) || !(y1 > y0)) {
    raise(ErrorCode::window_too_small,
          "erosion by " + std::to_string(D) + " leaves an empty window");
  }
  return Window(x0, x1, y0, y1);
}

}  // namespace gibbsfit
