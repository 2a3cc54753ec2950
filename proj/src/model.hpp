#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pattern.hpp"

namespace gibbsfit {

enum class Family {
  poisson,
  overlap_area,
  multi_strauss,
  knn_multi_strauss,
  strauss_disc,
  geyer_triplet,
  area_interaction,
};

std::string family_name(Family f);
std::optional<Family> family_from_name(const std::string& name);

/// Distance grid 0 <= D_1 < D_2 < ... < D_q for one unordered mark pair.
/// Band b (1-based, b = 1..q-1) collects pair distances in (D_b, D_{b+1}],
/// with the first band closed at D_1. A first radius D_1 > 0 is a hard core:
/// pairs closer than D_1 carry infinite energy.
struct PairGrid {
  std::vector<double> radii;
  int bands() const { return static_cast<int>(radii.size()) - 1; }
};

/// Per-component metadata: the parameter constraint and the integrability
/// constants kappa_sup, kappa_inf, k of the local statistic bound
/// |v_i(0^m | phi)| <= kappa_sup * |phi_B(0,D)|^k.
struct ComponentInfo {
  std::string name;
  bool nonnegative = false;  // parameter constrained to >= 0
  bool strict = false;       // bound excluded (> 0)
  bool is_count = false;     // first-type statistic (a point count)
  double kappa_sup = 1.0;
  double kappa_inf = 0.0;
  int power = 0;
};

/// One of the six exponential-family energy models, with all fixed
/// hyperparameters and the derived component layout, parameter constraints
/// and interaction range D.
class ModelSpec {
 public:
  /// Homogeneous Poisson reference model: v = (1), no interaction, D = 0.
  static ModelSpec poisson();
  static ModelSpec overlap_area(double R);
  static ModelSpec multi_strauss(int marks, std::vector<PairGrid> grids);
  static ModelSpec knn_multi_strauss(int marks, std::vector<PairGrid> grids,
                                     int k);
  static ModelSpec strauss_disc(double mark_max);
  static ModelSpec geyer_triplet(double R);
  static ModelSpec area_interaction(double R);

  Family family() const { return family_; }
  int dimension() const { return static_cast<int>(components_.size()); }
  /// Finite interaction range D: local statistics at x depend only on
  /// neighbours within distance D of x.
  double interaction_range() const { return range_; }
  const MarkSpace& mark_space() const { return marks_; }
  const std::vector<ComponentInfo>& components() const { return components_; }

  double disc_radius() const { return R_; }     // overlap/geyer/area R
  double mark_max() const { return mark_max_; } // strauss_disc
  int neighbour_count() const { return k_; }    // knn k
  int mark_count() const { return mark_count_; }
  bool hard_core() const { return hard_core_delta_ > 0.0; }
  double hard_core_delta() const { return hard_core_delta_; }

  // Multi-Strauss component layout (canonical ordering: for each mark m the
  // count component, then the band components of pairs (m, m), (m, m+1), ...).
  int count_component(int mark) const;
  int pair_component(int m1, int m2, int band) const;  // band 1-based
  const PairGrid& grid(int m1, int m2) const;

 private:
  ModelSpec() = default;
  void build_pair_layout();

  Family family_ = Family::overlap_area;
  MarkSpace marks_;
  double R_ = 0.0;
  double mark_max_ = 0.0;
  int k_ = 0;
  int mark_count_ = 1;
  double range_ = 0.0;
  double hard_core_delta_ = 0.0;
  std::vector<PairGrid> grids_;             // upper-triangle pair order
  std::vector<int> count_offsets_;          // per mark
  std::vector<int> pair_offsets_;           // per pair, first band component
  std::vector<ComponentInfo> components_;
};

/// A sufficient-statistics vector, with a flag marking hard-core violations
/// (which the statistics themselves do not see; they feed the energy).
struct StatValue {
  std::vector<double> v;
  bool hard_core = false;
};

struct ThetaCheck {
  bool ok = true;
  int component = -1;
  std::string message;
};

/// Checks theta against the family's parameter space. With closure=true the
/// strict bounds are relaxed to their closure (used inside the optimizer).
/// Throws on dimension mismatch.
ThetaCheck validate_theta(const ModelSpec& model, std::span<const double> theta,
                          bool closure = false);

/// v(phi): the global sufficient statistics of a configuration.
StatValue global_statistics(const ModelSpec& model,
                            const PointPattern& pattern);

/// v(x^m | phi) = v(phi u {x^m}) - v(phi), computed from the neighbours of x
/// within the interaction range. Throws if x is already in phi.
StatValue local_statistics(const ModelSpec& model, const MarkedPoint& x,
                           const PointPattern& pattern);

/// Core kernel: local statistics given the neighbours of x within
/// interaction_range(). Writes into out (size = dimension()); returns the
/// hard-core flag.
bool local_statistics_into(const ModelSpec& model, const MarkedPoint& x,
                           std::span<const MarkedPoint> neighbours,
                           std::span<double> out);

/// theta^T v(x^m | phi); +infinity on a hard-core violation.
double local_energy(const ModelSpec& model, std::span<const double> theta,
                    const MarkedPoint& x, const PointPattern& pattern);

/// A finite K with V(0^m | phi; theta) >= -K over all admissible
/// configurations and marks.
double stability_bound(const ModelSpec& model, std::span<const double> theta);

}  // namespace gibbsfit
