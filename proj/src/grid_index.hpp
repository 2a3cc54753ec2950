#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "pattern.hpp"

namespace gibbsfit {

/// Bucket index over marked points for radius-bounded neighbour queries.
class PointGrid {
 public:
  PointGrid(std::span<const MarkedPoint> points, double cell)
      : points_(points.begin(), points.end()), cell_(cell > 0 ? cell : 1.0) {
    buckets_.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
      buckets_[key_of(points_[i].location())].push_back(i);
    }
  }

  /// Calls fn(index, point) for every stored point within `radius` of p
  /// (inclusive), in insertion order within each visited bucket.
  template <typename F>
  void for_neighbours(const Point& p, double radius, F&& fn) const {
    const double r2 = radius * radius;
    const std::int64_t cx0 = coord(p.x - radius), cx1 = coord(p.x + radius);
    const std::int64_t cy0 = coord(p.y - radius), cy1 = coord(p.y + radius);
    for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
      for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
        const auto it = buckets_.find(pack(cx, cy));
        if (it == buckets_.end()) continue;
        for (std::size_t i : it->second) {
          if (squared_distance(points_[i].location(), p) <= r2) {
            fn(i, points_[i]);
          }
        }
      }
    }
  }

  std::span<const MarkedPoint> points() const { return points_; }

 private:
  std::int64_t coord(double v) const {
    return static_cast<std::int64_t>(std::floor(v / cell_));
  }
  std::uint64_t key_of(const Point& p) const {
    return pack(coord(p.x), coord(p.y));
  }
  static std::uint64_t pack(std::int64_t a, std::int64_t b) {
    return (static_cast<std::uint64_t>(a) << 32) ^
           static_cast<std::uint64_t>(b & 0xffffffff);
  }

  std::vector<MarkedPoint> points_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace gibbsfit
