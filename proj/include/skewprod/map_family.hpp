#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "skewprod/interval_map.hpp"

namespace skewprod {

/// Symbol of the Bernoulli base; symbol one selects the down map.
enum class Symbol : std::uint8_t { one = 1, two = 2 };

/// Pair of fiber maps with selection probabilities (p1, p2).
///
/// A plain aggregate: construction does not enforce the class conditions so
/// that invalid candidates can be reported by validate_family.
struct MapFamily {
  IntervalMap f_down;
  IntervalMap f_up;
  double p1 = 0.5;
  double p2 = 0.5;

  static MapFamily with_p1(IntervalMap down, IntervalMap up, double p1) {
    return MapFamily{std::move(down), std::move(up), p1, 1.0 - p1};
  }

  const IntervalMap& map_for(Symbol s) const { return s == Symbol::one ? f_down : f_up; }
  double probability(Symbol s) const { return s == Symbol::one ? p1 : p2; }

  /// Family of inverse maps. The inverse of the up map becomes the down map,
  /// so symbol one of the result corresponds to symbol two of this family.
  MapFamily inverted() const;
  /// Conjugate by x -> 1 - x; exchanges the roles of the two endpoints.
  MapFamily mirrored() const;
};

enum class Condition {
  probabilities,    // p1, p2 in (0,1) with p1 + p2 = 1
  boundary_fixed,   // f(0) = 0, f(1) = 1
  below_diagonal,   // f_down(x) < x on (0,1)
  above_diagonal,   // f_up(x) > x on (0,1)
  increasing,       // f' > 0 on [0,1]
};

const char* to_string(Condition c);

struct Violation {
  Condition condition;
  std::string map;  // "f1", "f2" or "base"
  double witness;   // x at which the condition failed (NaN when not pointwise)
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Checks the class conditions and monotonicity on the interior points k/grid_size.
ValidationReport validate_family(const MapFamily& family, std::size_t grid_size);

// Named families used throughout the tests, examples and CLI presets.
namespace families {

/// g1, g2: logit translations by -1 and +1.
MapFamily symmetric_walk(double p1 = 0.5);
/// x -/+ r x (1 - x); both boundaries attracting for r = 1/2, p = 1/2.
MapFamily kan(double r = 0.5, double p1 = 0.5);
/// Inverses of the Kan maps; both boundaries repelling.
MapFamily inverse_kan(double r = 0.5, double p1 = 0.5);
/// g_i(x) (1 - c x (1 - x)) with c = 3/10: neutral at 0, repelling at 1.
MapFamily onoff(double damping = 0.3, double p1 = 0.5);
/// Logistic pair with r_down != r_up.
MapFamily logistic_pair(double r_down, double r_up, double p1 = 0.5);

}  // namespace families

}  // namespace skewprod
