#pragma once

#include <concepts>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "skewprod/coordinates.hpp"
#include "skewprod/map_family.hpp"
#include "skewprod/symbols.hpp"

namespace skewprod {

// Composition conventions, fixed here once:
//   forward   f^n_w      = f_{w[n-1]} o ... o f_{w[0]}       (w[0] applied first)
//   pullback  f^n_{s^-n} = f_{past[n-1]} o ... o f_{past[0]} (past[0] = oldest symbol)
//   inverse   f^-n       = f^-1_{past[0]} o ... o f^-1_{past[n-1]}
// so the pullback over a past word is the same finite composition as the
// forward orbit over the same word.

struct OrbitSample {
  std::uint64_t step;
  double value;
};

struct Orbit {
  Coordinate coordinate = Coordinate::logit;
  std::vector<OrbitSample> samples;
};

template <class S>
concept SymbolSource = requires(S s) {
  { s.next() } -> std::same_as<Symbol>;
};

/// Advances a logit-coordinate fiber point n steps.
template <SymbolSource Source>
double advance_logit(const MapFamily& family, Source& src, double y, std::uint64_t n) {
  for (std::uint64_t i = 0; i < n; ++i) y = family.map_for(src.next()).eval_logit(y);
  return y;
}

/// samples[k] = f^{k stride}(x0) in `coordinate`; x0 is given in the same
/// coordinate. Plain mode iterates in plain arithmetic (cross-check only);
/// Log and Logit modes iterate in logit internally.
Orbit forward_orbit(const MapFamily& family, std::span<const Symbol> word, double x0, std::uint64_t n,
                    Coordinate coordinate, std::uint64_t stride = 1);

/// f^n_{sigma^-n w}(x0) for a past word listed oldest first.
double pullback_point(const MapFamily& family, std::span<const Symbol> past, double x0, Coordinate coordinate);

/// k-th sample is f^-k(y0), undoing the newest past symbol first.
Orbit inverse_orbit(const MapFamily& family, std::span<const Symbol> past, double y0, Coordinate coordinate);

/// CSV with header step,value,coordinate.
void write_orbit_csv(std::ostream& os, const Orbit& orbit);

}  // namespace skewprod
