#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "skewprod/map_family.hpp"

namespace skewprod {

/// Probability measure on [0,1]: atoms at both endpoints plus masses on B
/// uniform interior bins, uniformly spread within each bin.
///
/// Bin k covers (k/B, (k+1)/B). The cumulative distribution is therefore
/// piecewise linear between bin edges with jumps at 0 and 1 only.
class BinnedMeasure {
 public:
  explicit BinnedMeasure(std::size_t bins);
  BinnedMeasure(double atom0, std::vector<double> bins, double atom1);

  static BinnedMeasure dirac0(std::size_t bins);
  static BinnedMeasure dirac1(std::size_t bins);
  static BinnedMeasure lebesgue(std::size_t bins);
  /// Boundary mixture s delta_0 + (1 - s) delta_1.
  static BinnedMeasure boundary_mixture(double s, std::size_t bins);

  std::size_t bin_count() const { return bins_.size(); }
  double width() const { return 1.0 / static_cast<double>(bins_.size()); }
  double left(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(bins_.size()); }
  double right(std::size_t k) const { return static_cast<double>(k + 1) / static_cast<double>(bins_.size()); }

  double atom0() const { return atom0_; }
  double atom1() const { return atom1_; }
  std::span<const double> bins() const { return bins_; }
  std::span<double> bins() { return bins_; }
  double& atom0() { return atom0_; }
  double& atom1() { return atom1_; }

  double total_mass() const;
  double interior_mass() const;
  /// m([0, x)) including the atom at 0 for x > 0.
  double mass_below(double x) const;
  /// m((1 - x, 1]) including the atom at 1 for x > 0.
  double mass_above(double x) const;

  /// s a + (1 - s) b on a common grid.
  static BinnedMeasure mix(double s, const BinnedMeasure& a, const BinnedMeasure& b);

 private:
  double atom0_ = 0.0;
  double atom1_ = 0.0;
  std::vector<double> bins_;
};

/// Push-forward under a monotone map; exact for the cumulative distribution at bin edges.
BinnedMeasure pushforward(const BinnedMeasure& m, const IntervalMap& map);

/// Precomputed push-forward for repeated application: preimages of the bin
/// edges are located once.
class PushforwardPlan {
 public:
  PushforwardPlan(const IntervalMap& map, std::size_t bins);
  /// Plan for the map whose inverse sends edge k to preimage_edges[k].
  static PushforwardPlan from_preimages(std::span<const double> preimage_edges);
  /// out += weight * (map_* m)
  void apply(const BinnedMeasure& m, double weight, BinnedMeasure& out) const;

 private:
  PushforwardPlan() = default;
  void locate(std::span<const double> preimage_edges);

  std::vector<std::size_t> index_;  // bin containing the preimage of each edge
  std::vector<double> frac_;        // position inside that bin, in [0,1]
};

/// T m = p1 f1 m + p2 f2 m.
BinnedMeasure transfer(const BinnedMeasure& m, const MapFamily& family);

/// Cached transfer operator for one family and grid.
class TransferOperator {
 public:
  TransferOperator(const MapFamily& family, std::size_t bins);
  BinnedMeasure operator()(const BinnedMeasure& m) const;

 private:
  double p1_, p2_;
  std::size_t bins_;
  PushforwardPlan down_, up_;
};

enum class Metric { total_variation, bounded_lipschitz };

/// Total variation is (1/2) sum |a - b| over atoms and bins. The
/// bounded-Lipschitz distance under the norm max(sup|f|, Lip f) coincides on
/// [0,1] with the Wasserstein-1 distance, computed here exactly for the
/// piecewise linear distribution functions.
double distance(const BinnedMeasure& a, const BinnedMeasure& b, Metric metric);

struct KrylovBogolyubovResult {
  BinnedMeasure average;
  std::vector<double> residuals;  // residuals[n-1] = d(T avg_n, avg_n)
};

/// Cesaro averages (1/n) sum_{r<n} T^r m0 with the residual after each step.
KrylovBogolyubovResult krylov_bogolyubov(const BinnedMeasure& m0, const MapFamily& family, std::size_t iterations,
                                         Metric metric = Metric::total_variation);

struct ConeParams {
  double c = 0.0;
  double alpha = 0.0;
  double q = 0.0;
  bool valid() const;
};

struct ConeCheck {
  bool inside = true;
  std::optional<double> first_violation;
};

/// Tail bounds m([0,x)) <= c x^alpha and m((1-x,1]) <= c x^alpha for x <= q,
/// checked at bin edges (sufficient: the distribution function is linear
/// between edges and c x^alpha is concave) plus an atom witness.
ConeCheck cone_check(const BinnedMeasure& m, const ConeParams& cone);

struct ConeSearch {
  ConeParams cone;
  double delta = 0.0;
  double contraction_zero = 0.0;  // sum p_i (rho_i - delta)^-alpha at 0
  double contraction_one = 0.0;   // same at 1
};

/// Searches a small grid for (alpha, delta, q, c) such that the contraction
/// sums at both endpoints are < 1 and the preimage bound
/// f_i^-1(x) <= x / (rho_i - delta) holds for x <= q (and its mirror at 1).
/// Returns nullopt if no grid point works (e.g. a boundary exponent <= 0).
std::optional<ConeSearch> find_cone(const MapFamily& family, std::size_t bins);

/// sum_i p_i int_0^1 (f_{i,zeta})_* m dzeta with f_{i,zeta} = (1 - eps) f_i + zeta eps,
/// midpoint rule in zeta.
BinnedMeasure noisy_transfer(const BinnedMeasure& m, const MapFamily& family, double epsilon,
                             std::size_t quadrature_nodes = 32);

/// sum_i p_i int ln f_i' dm with bin-midpoint quadrature and exact atom terms.
double lyapunov_vs_measure(const MapFamily& family, const BinnedMeasure& m);

/// Discrete Kullback-Leibler divergence over (atom0, bins, atom1); +inf when
/// m1 charges a cell where m2 vanishes.
double relative_entropy(const BinnedMeasure& m1, const BinnedMeasure& m2);

/// Push-forward of m under the pullback composition over `past` (oldest first).
BinnedMeasure pullback_pushforward(const BinnedMeasure& m, const MapFamily& family, std::span<const Symbol> past);

/// CSV with header cell_kind,left,right,mass.
void write_measure_csv(std::ostream& os, const BinnedMeasure& m);

}  // namespace skewprod
