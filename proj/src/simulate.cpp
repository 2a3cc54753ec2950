#include "simulate.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include "rng.hpp"

namespace gibbsfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Mutable bucket grid over the chain state, supporting O(1) insert, delete
/// and uniform selection.
class ChainState {
 public:
  ChainState(const Window& window, double cell) : cell_(cell > 0 ? cell : 1.0) {
    (void)window;
  }

  std::size_t size() const { return points_.size(); }
  const MarkedPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<MarkedPoint>& points() const { return points_; }

  void insert(const MarkedPoint& p) {
    const std::uint64_t key = key_of(p.location());
    keys_.push_back(key);
    slots_.push_back(buckets_[key].size());
    buckets_[key].push_back(points_.size());
    points_.push_back(p);
  }

  void erase(std::size_t i) {
    remove_from_bucket(i);
    const std::size_t last = points_.size() - 1;
    if (i != last) {
      points_[i] = points_[last];
      keys_[i] = keys_[last];
      slots_[i] = slots_[last];
      buckets_[keys_[i]][slots_[i]] = i;
    }
    points_.pop_back();
    keys_.pop_back();
    slots_.pop_back();
  }

  /// Collects neighbours of p within `radius`, skipping index `skip`
  /// (pass size() to keep everything). Returns false if a stored point
  /// coincides with p exactly.
  bool gather(const Point& p, double radius, std::size_t skip,
              std::vector<MarkedPoint>& out) const {
    out.clear();
    const double r2 = radius * radius;
    const std::int64_t cx0 = coord(p.x - radius), cx1 = coord(p.x + radius);
    const std::int64_t cy0 = coord(p.y - radius), cy1 = coord(p.y + radius);
    for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
      for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
        const auto it = buckets_.find(pack(cx, cy));
        if (it == buckets_.end()) continue;
        for (std::size_t i : it->second) {
          if (i == skip) continue;
          const double d2 = squared_distance(points_[i].location(), p);
          if (d2 == 0.0) return false;
          if (d2 <= r2) out.push_back(points_[i]);
        }
      }
    }
    return true;
  }

 private:
  void remove_from_bucket(std::size_t i) {
    auto& bucket = buckets_[keys_[i]];
    const std::size_t slot = slots_[i];
    const std::size_t moved = bucket.back();
    bucket[slot] = moved;
    if (moved != i) slots_[moved] = slot;
    bucket.pop_back();
  }

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

  double cell_;
  std::vector<MarkedPoint> points_;
  std::vector<std::uint64_t> keys_;
  std::vector<std::size_t> slots_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

double sample_mark(const MarkSpace& marks, Rng& rng) {
  switch (marks.kind) {
    case MarkKind::unit:
      return 0.0;
    case MarkKind::finite:
      return 1.0 + static_cast<double>(rng.uniform_index(
                       static_cast<std::uint64_t>(marks.count)));
    case MarkKind::interval:
      return rng.uniform(0.0, marks.max);
  }
  return 0.0;
}

}  // namespace

SimResult simulate_mh(const ModelSpec& model, const SimConfig& config) {
  const ThetaCheck check = validate_theta(model, config.theta);
  if (!check.ok) raise(ErrorCode::invalid_parameter, check.message);
  if (config.steps < 0 || config.burn_in < 0 || config.steps < config.burn_in) {
    raise(ErrorCode::invalid_input, "need steps >= burn_in >= 0");
  }
  const double mix_sum = config.p_birth + config.p_death + config.p_move;
  if (config.p_birth < 0 || config.p_death < 0 || config.p_move < 0 ||
      std::abs(mix_sum - 1.0) > 1e-12) {
    raise(ErrorCode::invalid_input,
          "proposal probabilities must be nonnegative and sum to 1");
  }

  const Window& win = config.window;
  const double area = win.area();
  const double D = model.interaction_range();
  const std::size_t p = static_cast<std::size_t>(model.dimension());

  ChainState state(win, D);
  Rng rng(config.seed);
  std::vector<MarkedPoint> nbrs;
  std::vector<double> stats(p);

  const auto local_energy_at = [&](const MarkedPoint& x, std::size_t skip,
                                   bool& ok) {
    ok = state.gather(x.location(), D, skip, nbrs);
    if (!ok) return kInf;
    const bool hard = local_statistics_into(model, x, nbrs, stats);
    if (hard) return kInf;
    double e = 0.0;
    for (std::size_t c = 0; c < p; ++c) e += config.theta[c] * stats[c];
    return e;
  };

  SimResult result{
      PointPattern({}, win, model.mark_space()), {0, 0, 0}, {0, 0, 0}};

  for (long long step = 0; step < config.steps; ++step) {
    const double u = rng.uniform();
    const std::size_t n = state.size();
    if (u < config.p_birth) {
      result.proposals[0] += 1;
      MarkedPoint x{rng.uniform(win.xmin, win.xmax),
                    rng.uniform(win.ymin, win.ymax),
                    sample_mark(model.mark_space(), rng)};
      bool ok = true;
      const double energy = local_energy_at(x, state.size(), ok);
      if (!ok) continue;  // exact coincidence, reject
      const double ratio = area * config.p_death /
                           (static_cast<double>(n + 1) * config.p_birth) *
                           std::exp(-energy);
      if (rng.uniform() < ratio) {
        state.insert(x);
        result.accepted[0] += 1;
      }
    } else if (u < config.p_birth + config.p_death) {
      result.proposals[1] += 1;
      if (n == 0) continue;
      const std::size_t victim = rng.uniform_index(n);
      bool ok = true;
      const double energy = local_energy_at(state[victim], victim, ok);
      const double ratio = static_cast<double>(n) * config.p_birth /
                           (area * config.p_death) * std::exp(energy);
      if (rng.uniform() < ratio) {
        state.erase(victim);
        result.accepted[1] += 1;
      }
    } else {
      result.proposals[2] += 1;
      if (n == 0) continue;
      const std::size_t mover = rng.uniform_index(n);
      MarkedPoint to{rng.uniform(win.xmin, win.xmax),
                     rng.uniform(win.ymin, win.ymax), state[mover].mark};
      bool ok = true;
      const double e_new = local_energy_at(to, mover, ok);
      if (!ok) continue;
      bool ok_old = true;
      const double e_old = local_energy_at(state[mover], mover, ok_old);
      if (rng.uniform() < std::exp(e_old - e_new)) {
        state.erase(mover);
        state.insert(to);
        result.accepted[2] += 1;
      }
    }
  }

  result.pattern =
      PointPattern(state.points(), win, model.mark_space());
  return result;
}

}  // namespace gibbsfit
