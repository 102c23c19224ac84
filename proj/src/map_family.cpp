#include "skewprod/map_family.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "skewprod/coordinates.hpp"

namespace skewprod {

MapFamily MapFamily::inverted() const { return MapFamily{f_up.inverted(), f_down.inverted(), p2, p1}; }

MapFamily MapFamily::mirrored() const { return MapFamily{f_up.mirrored(), f_down.mirrored(), p2, p1}; }

const char* to_string(Condition c) {
  switch (c) {
    case Condition::probabilities: return "probabilities";
    case Condition::boundary_fixed: return "boundary_fixed";
    case Condition::below_diagonal: return "below_diagonal";
    case Condition::above_diagonal: return "above_diagonal";
    case Condition::increasing: return "increasing";
  }
  return "?";
}

std::string ValidationReport::summary() const {
  if (ok()) {
    return "pass";
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i > 0) os << "; ";
    os << violations[i].message;
  }
  return os.str();
}

namespace {

void check_map(const IntervalMap& f, const char* name, Direction expected, std::size_t grid,
               std::vector<Violation>& out) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (f.eval(0.0) != 0.0 || f.eval(1.0) != 1.0) {
    out.push_back({Condition::boundary_fixed, name, nan, std::string(name) + " does not fix the endpoints"});
  }

  bool mono_reported = false;
  bool dir_reported = false;
  for (std::size_t k = 0; k <= grid; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(grid);
    const double d = f.derivative(x);
    if (!mono_reported && !(d > 0.0)) {
      out.push_back({Condition::increasing, name, x, std::string(name) + " not increasing"});
      mono_reported = true;
    }
    if (k == 0 || k == grid || dir_reported) {
      continue;
    }
    const double y = logit(x);
    const double fy = f.eval_logit(y);
    const bool ok = expected == Direction::down ? fy < y : fy > y;
    if (!ok) {
      const auto cond = expected == Direction::down ? Condition::below_diagonal : Condition::above_diagonal;
      out.push_back({cond, name, x,
                     std::string(name) + (expected == Direction::down ? " not below" : " not above") +
                         " the diagonal (direction mismatch)"});
      dir_reported = true;
    }
  }
}

}  // namespace

ValidationReport validate_family(const MapFamily& family, std::size_t grid_size) {
  if (grid_size < 2) {
    throw std::invalid_argument("validate_family: grid_size must be >= 2");
  }
  ValidationReport report;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool p_ok = family.p1 > 0.0 && family.p1 < 1.0 && family.p2 > 0.0 && family.p2 < 1.0 &&
                    std::fabs(family.p1 + family.p2 - 1.0) <= 1e-15;
  if (!p_ok) {
    report.violations.push_back(
        {Condition::probabilities, "base", nan, "probabilities must lie in (0,1) and sum to 1"});
  }
  check_map(family.f_down, "f1", Direction::down, grid_size, report.violations);
  check_map(family.f_up, "f2", Direction::up, grid_size, report.violations);
  return report;
}

namespace families {

MapFamily symmetric_walk(double p1) {
  return MapFamily::with_p1(IntervalMap::moebius(-1.0), IntervalMap::moebius(1.0), p1);
}

MapFamily kan(double r, double p1) {
  return MapFamily::with_p1(IntervalMap::logistic_perturb(r, Direction::down),
                            IntervalMap::logistic_perturb(r, Direction::up), p1);
}

MapFamily inverse_kan(double r, double p1) { return kan(r, 1.0 - p1).inverted(); }

MapFamily onoff(double damping, double p1) {
  return MapFamily::with_p1(IntervalMap::damped_moebius(-1.0, damping), IntervalMap::damped_moebius(1.0, damping),
                            p1);
}

MapFamily logistic_pair(double r_down, double r_up, double p1) {
  return MapFamily::with_p1(IntervalMap::logistic_perturb(r_down, Direction::down),
                            IntervalMap::logistic_perturb(r_up, Direction::up), p1);
}

}  // namespace families

}  // namespace skewprod
