#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "skewprod/map_family.hpp"

namespace skewprod {

enum class Regime {
  intermingled_basins,  // L0 < 0, L1 < 0
  synchronization,      // L0 > 0, L1 > 0
  onoff_at_zero,        // L0 = 0, L1 > 0
  onoff_at_one,         // L0 > 0, L1 = 0
  double_neutral,       // L0 = 0, L1 = 0
  drift_to_one,         // L0 >= 0, L1 < 0
  drift_to_zero,        // L0 < 0, L1 >= 0
};

const char* to_string(Regime r);
/// Regime obtained after conjugating by x -> 1 - x.
Regime mirror(Regime r);

struct RegimeReport {
  double L0 = 0.0;
  double L1 = 0.0;
  Regime regime = Regime::double_neutral;
  double zero_tolerance = 0.0;
};

/// p1 ln f1'(e) + p2 ln f2'(e). Returns exactly 0 when the endpoint
/// derivatives are reciprocal and the probabilities equal.
double boundary_exponent(const MapFamily& family, Endpoint endpoint);

Regime regime_from_exponents(double L0, double L1, double zero_tolerance);

/// Classification by the signs of the boundary exponents; |L| <= zero_tolerance counts as zero.
RegimeReport classify_regime(const MapFamily& family, double zero_tolerance = 1e-12);

struct FiberExponent {
  double value = 0.0;       // (1/n) sum ln f'(x_i)
  double summand_sd = 0.0;  // sample standard deviation of the summands
  std::uint64_t steps = 0;
};

/// Birkhoff average of ln f'_{w_i}(x_i) along the forward orbit of x0.
FiberExponent empirical_fiber_exponent(const MapFamily& family, std::span<const Symbol> word, double x0,
                                       std::uint64_t n);

enum class MinimalityVerdict { sufficient_condition_holds, inconclusive };
enum class MinimalityClause { irrational_ratio, second_derivative, none, precondition_failed };

const char* to_string(MinimalityVerdict v);
const char* to_string(MinimalityClause c);

struct EndpointMinimality {
  Endpoint endpoint = Endpoint::zero;
  bool precondition = false;
  double lambda = 0.0;  // contracting multiplier
  double mu = 0.0;      // expanding multiplier
  double ratio = 0.0;   // ln lambda / ln mu
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;
  double residual = 0.0;  // |q ratio - p| for the best q <= Q
  bool rationally_dependent = false;
  double curvature_down = 0.0;  // f1''(e) / (lambda^2 - lambda), in linearizing orientation
  double curvature_up = 0.0;    // f2''(e) / (mu^2 - mu)
  MinimalityClause clause = MinimalityClause::none;
};

struct MinimalityReport {
  MinimalityVerdict verdict = MinimalityVerdict::inconclusive;
  MinimalityClause clause = MinimalityClause::none;
  std::uint64_t Q = 0;
  double tau = 0.0;
  EndpointMinimality at_zero;
  EndpointMinimality at_one;
};

/// Best approximation p/q (q <= max_denominator) of x in the sense of the
/// smallest |q x - p|, via continued-fraction convergents.
struct RationalFit {
  std::int64_t p = 0;
  std::int64_t q = 1;
  double residual = 0.0;
};
RationalFit best_rational(double x, std::uint64_t max_denominator);

/// Sufficient conditions for minimality of the iterated function system at
/// both endpoints. Rational dependence of ln lambda / ln mu is judged by the
/// integer-relation residual |q ratio - p| <= tau over q <= Q; a positive
/// verdict means "no relation up to (Q, tau)", never a proof of irrationality.
MinimalityReport minimality_check(const MapFamily& family, std::uint64_t rational_denominator_bound = 1000000,
                                  double tolerance = 1e-9);

}  // namespace skewprod
