#pragma once

#include <cmath>

namespace skewprod {

/// Fiber coordinate used to represent a point of [0,1].
///
/// Plain is x itself, Log is u = ln x and Logit is y = ln(x / (1 - x)).
/// Both boundary points are fixed by every class map, so long runs are
/// carried out in Logit where neither boundary saturates.
enum class Coordinate { plain, log, logit };

const char* to_string(Coordinate c);

/// Inverse of the logit: x = 1 / (1 + e^-y), evaluated without overflow.
inline double logistic(double y) {
  if (y >= 0) {
    return 1.0 / (1.0 + std::exp(-y));
  }
  const double e = std::exp(y);
  return e / (1.0 + e);
}

/// 1 - logistic(y), accurate when the result is tiny.
inline double logistic_complement(double y) { return logistic(-y); }

inline double logit(double x) { return std::log(x) - std::log1p(-x); }

inline double log_from_logit(double y) {
  if (y > 0) {
    return -std::log1p(std::exp(-y));
  }
  return y - std::log1p(std::exp(y));
}

inline double logit_from_log(double u) { return u - std::log(-std::expm1(u)); }

/// Converts a plain value in [0,1] to the requested coordinate.
double from_plain(double x, Coordinate c);
/// Converts a value in coordinate c back to [0,1].
double to_plain(double v, Coordinate c);
double to_logit(double v, Coordinate c);
double from_logit(double y, Coordinate c);

}  // namespace skewprod
