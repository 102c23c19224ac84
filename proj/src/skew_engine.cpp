#include "skewprod/skew_engine.hpp"

#include <stdexcept>

#include "skewprod/csv.hpp"

namespace skewprod {

Orbit forward_orbit(const MapFamily& family, std::span<const Symbol> word, double x0, std::uint64_t n,
                    Coordinate coordinate, std::uint64_t stride) {
  if (word.size() < n) {
    throw std::length_error("forward_orbit: word shorter than the requested number of steps");
  }
  if (stride == 0) {
    throw std::invalid_argument("forward_orbit: stride must be positive");
  }
  Orbit orbit;
  orbit.coordinate = coordinate;
  orbit.samples.reserve(n / stride + 1);
  orbit.samples.push_back({0, x0});

  if (coordinate == Coordinate::plain) {
    double x = x0;
    for (std::uint64_t i = 0; i < n; ++i) {
      x = family.map_for(word[i]).eval(x);
      if ((i + 1) % stride == 0) orbit.samples.push_back({i + 1, x});
    }
    return orbit;
  }

  double y = to_logit(x0, coordinate);
  for (std::uint64_t i = 0; i < n; ++i) {
    y = family.map_for(word[i]).eval_logit(y);
    if ((i + 1) % stride == 0) orbit.samples.push_back({i + 1, from_logit(y, coordinate)});
  }
  return orbit;
}

double pullback_point(const MapFamily& family, std::span<const Symbol> past, double x0, Coordinate coordinate) {
  if (coordinate == Coordinate::plain) {
    double x = x0;
    for (Symbol s : past) x = family.map_for(s).eval(x);
    return x;
  }
  double y = to_logit(x0, coordinate);
  for (Symbol s : past) y = family.map_for(s).eval_logit(y);
  return from_logit(y, coordinate);
}

Orbit inverse_orbit(const MapFamily& family, std::span<const Symbol> past, double y0, Coordinate coordinate) {
  Orbit orbit;
  orbit.coordinate = coordinate;
  orbit.samples.reserve(past.size() + 1);
  orbit.samples.push_back({0, y0});
  if (coordinate == Coordinate::plain) {
    double x = y0;
    std::uint64_t k = 0;
    for (auto it = past.rbegin(); it != past.rend(); ++it) {
      x = family.map_for(*it).inverse_eval(x);
      orbit.samples.push_back({++k, x});
    }
    return orbit;
  }
  double y = to_logit(y0, coordinate);
  std::uint64_t k = 0;
  for (auto it = past.rbegin(); it != past.rend(); ++it) {
    y = family.map_for(*it).inverse_eval_logit(y);
    orbit.samples.push_back({++k, from_logit(y, coordinate)});
  }
  return orbit;
}

void write_orbit_csv(std::ostream& os, const Orbit& orbit) {
  os << "step,value,coordinate\n";
  for (const auto& s : orbit.samples) {
    os << s.step << ',' << csv::real(s.value) << ',' << to_string(orbit.coordinate) << '\n';
  }
}

}  // namespace skewprod
