#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace skewprod {

enum class MapKind {
  moebius,           // x -> a x / (1 + (a - 1) x)
  logistic_perturb,  // x -> x +/- r x (1 - x)
  damped_moebius,    // x -> g(x) (1 - c x (1 - x)), g Moebius
  inverse,           // inverse of a wrapped map
  mirror,            // x -> 1 - f(1 - x)
  composite,         // parts applied first to last
};

enum class Direction { down, up };

enum class Endpoint { zero, one };

const char* to_string(MapKind k);
const char* to_string(Direction d);

/// Increasing diffeomorphism of [0,1] fixing both endpoints.
///
/// Immutable value type; copies share the wrapped children. Every kind can be
/// evaluated in plain, log and logit coordinates. The log/logit forms stay
/// finite for points far closer to the boundary than a double can represent
/// in plain coordinates, which is what long orbit runs rely on.
class IntervalMap {
 public:
  /// Moebius map with multiplier a = exp(log_multiplier); f'(0) = a and
  /// f'(1) = 1/a. In logit coordinates it is the translation y -> y + ln a.
  static IntervalMap moebius(double log_multiplier);
  /// x - r x (1 - x) for Direction::down, x + r x (1 - x) for Direction::up.
  /// r >= 0; values r >= 1 construct but fail validation (not increasing).
  static IntervalMap logistic_perturb(double r, Direction dir);
  /// Moebius map damped by (1 - c x (1 - x)).
  static IntervalMap damped_moebius(double log_multiplier, double damping);
  /// Composition applying parts[0] first.
  static IntervalMap composite(std::vector<IntervalMap> parts);

  IntervalMap inverted() const;
  IntervalMap mirrored() const;

  MapKind kind() const { return kind_; }
  /// Family parameters in declaration order (empty for wrapper kinds).
  std::vector<double> params() const;
  /// Wrapped maps for inverse, mirror and composite kinds.
  std::span<const IntervalMap> parts() const;
  /// Whether f(x) < x (down) or f(x) > x (up) on (0,1), judged at x = 1/2.
  Direction direction() const;

  /// Expression form, e.g. "inverse(logistic(0.5,down))".
  std::string expression() const;

  double eval(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  double inverse_eval(double y) const;

  /// ln f(e^u) for u <= 0.
  double eval_log(double u) const;
  /// logit(f(x)) as a function of y = logit(x).
  double eval_logit(double y) const;
  /// logit(f^-1(x)) as a function of y = logit(x).
  double inverse_eval_logit(double y) const;

  /// Exact ln f'(e) at a boundary point.
  double log_derivative_at(Endpoint e) const;
  double derivative_at(Endpoint e) const;
  double second_derivative_at(Endpoint e) const;
  double second_derivative_at_zero() const { return second_derivative_at(Endpoint::zero); }

  friend bool operator==(const IntervalMap& a, const IntervalMap& b);

 private:
  IntervalMap() = default;

  MapKind kind_ = MapKind::moebius;
  double p0_ = 0.0;
  double p1_ = 0.0;
  // cached: multiplier a and a - 1 for the Moebius-based kinds
  double a_ = 1.0;
  double b_ = 0.0;
  std::shared_ptr<const std::vector<IntervalMap>> parts_;

  double damped_logit_increment(double x, double xc) const;
  double damped_logit_slope(double x, double xc) const;
  double damped_inverse_logit(double y) const;
};

/// Slack accepted on the unit interval before a domain error is raised.
inline constexpr double kDomainSlack = 1e-12;

}  // namespace skewprod
