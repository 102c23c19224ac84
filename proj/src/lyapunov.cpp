#include "skewprod/lyapunov.hpp"

#include <cfloat>
#include <cmath>
#include <stdexcept>

#include "skewprod/coordinates.hpp"

namespace skewprod {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::intermingled_basins: return "IntermingledBasins";
    case Regime::synchronization: return "Synchronization";
    case Regime::onoff_at_zero: return "OnOffAtZero";
    case Regime::onoff_at_one: return "OnOffAtOne";
    case Regime::double_neutral: return "DoubleNeutral";
    case Regime::drift_to_one: return "DriftToOne";
    case Regime::drift_to_zero: return "DriftToZero";
  }
  return "?";
}

Regime mirror(Regime r) {
  switch (r) {
    case Regime::onoff_at_zero: return Regime::onoff_at_one;
    case Regime::onoff_at_one: return Regime::onoff_at_zero;
    case Regime::drift_to_one: return Regime::drift_to_zero;
    case Regime::drift_to_zero: return Regime::drift_to_one;
    default: return r;
  }
}

const char* to_string(MinimalityVerdict v) {
  return v == MinimalityVerdict::sufficient_condition_holds ? "SufficientConditionHolds" : "Inconclusive";
}

const char* to_string(MinimalityClause c) {
  switch (c) {
    case MinimalityClause::irrational_ratio: return "irrational_ratio";
    case MinimalityClause::second_derivative: return "second_derivative";
    case MinimalityClause::none: return "none";
    case MinimalityClause::precondition_failed: return "precondition_failed";
  }
  return "?";
}

double boundary_exponent(const MapFamily& family, Endpoint endpoint) {
  const double l1 = family.f_down.log_derivative_at(endpoint);
  const double l2 = family.f_up.log_derivative_at(endpoint);
  if (family.p1 == family.p2 && l1 == -l2) {
    return 0.0;
  }
  return family.p1 * l1 + family.p2 * l2;
}

Regime regime_from_exponents(double L0, double L1, double tol) {
  auto sign = [tol](double L) { return std::fabs(L) <= tol ? 0 : (L > 0 ? 1 : -1); };
  const int s0 = sign(L0);
  const int s1 = sign(L1);
  if (s0 < 0 && s1 < 0) return Regime::intermingled_basins;
  if (s0 > 0 && s1 > 0) return Regime::synchronization;
  if (s0 == 0 && s1 > 0) return Regime::onoff_at_zero;
  if (s0 > 0 && s1 == 0) return Regime::onoff_at_one;
  if (s0 == 0 && s1 == 0) return Regime::double_neutral;
  if (s0 >= 0 && s1 < 0) return Regime::drift_to_one;
  return Regime::drift_to_zero;
}

RegimeReport classify_regime(const MapFamily& family, double zero_tolerance) {
  if (!(zero_tolerance >= 0.0)) {
    throw std::invalid_argument("classify_regime: zero_tolerance must be >= 0");
  }
  RegimeReport r;
  r.L0 = boundary_exponent(family, Endpoint::zero);
  r.L1 = boundary_exponent(family, Endpoint::one);
  r.zero_tolerance = zero_tolerance;
  r.regime = regime_from_exponents(r.L0, r.L1, zero_tolerance);
  return r;
}

FiberExponent empirical_fiber_exponent(const MapFamily& family, std::span<const Symbol> word, double x0,
                                       std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("empirical_fiber_exponent: n must be >= 1");
  }
  if (word.size() < n) {
    throw std::length_error("empirical_fiber_exponent: word shorter than n");
  }
  double mean = 0.0;
  double m2 = 0.0;
  auto accumulate = [&](std::uint64_t i, double term) {
    const double delta = term - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (term - mean);
  };

  if (x0 == 0.0 || x0 == 1.0) {
    const Endpoint e = x0 == 0.0 ? Endpoint::zero : Endpoint::one;
    for (std::uint64_t i = 0; i < n; ++i) accumulate(i, family.map_for(word[i]).log_derivative_at(e));
  } else {
    double y = logit(x0);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto& f = family.map_for(word[i]);
      accumulate(i, std::log(f.derivative(logistic(y))));
      y = f.eval_logit(y);
    }
  }
  FiberExponent out;
  out.value = mean;
  out.summand_sd = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
  out.steps = n;
  return out;
}

RationalFit best_rational(double x, std::uint64_t max_denominator) {
  RationalFit best;
  best.p = static_cast<std::int64_t>(std::llround(x));
  best.q = 1;
  best.residual = std::fabs(x - static_cast<double>(best.p));

  long double rest = x;
  long double h_prev = 1, h = std::floor(rest);
  long double k_prev = 0, k = 1;
  rest -= h;
  for (int it = 0; it < 64; ++it) {
    const long double res = std::fabs(k * static_cast<long double>(x) - h);
    if (k <= static_cast<long double>(max_denominator) && static_cast<double>(res) < best.residual) {
      best = {static_cast<std::int64_t>(h), static_cast<std::int64_t>(k), static_cast<double>(res)};
    }
    if (rest <= 1e-18L) break;
    rest = 1.0L / rest;
    const long double a = std::floor(rest);
    rest -= a;
    const long double h_next = a * h + h_prev;
    const long double k_next = a * k + k_prev;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
    if (k > static_cast<long double>(max_denominator)) break;
  }
  return best;
}

namespace {

// Conditions at endpoint 0 of `family`; the endpoint-1 check runs this on the mirrored family.
EndpointMinimality check_at_zero(const MapFamily& family, std::uint64_t Q, double tau) {
  EndpointMinimality r;
  const double ll = family.f_down.log_derivative_at(Endpoint::zero);
  const double lm = family.f_up.log_derivative_at(Endpoint::zero);
  r.lambda = std::exp(ll);
  r.mu = std::exp(lm);
  r.precondition = ll < 0.0 && lm > 0.0;
  if (!r.precondition) {
    r.clause = MinimalityClause::precondition_failed;
    return r;
  }
  r.ratio = ll / lm;
  const RationalFit fit = best_rational(r.ratio, Q);
  r.numerator = fit.p;
  r.denominator = fit.q;
  r.residual = fit.residual;
  // rounding in ln(lambda)/ln(mu) is amplified by q
  const double floor = 4.0 * DBL_EPSILON * static_cast<double>(fit.q) * std::max(1.0, std::fabs(r.ratio));
  r.rationally_dependent = fit.residual <= std::max(tau, floor);

  r.curvature_down = family.f_down.second_derivative_at(Endpoint::zero) / (r.lambda * r.lambda - r.lambda);
  r.curvature_up = family.f_up.second_derivative_at(Endpoint::zero) / (r.mu * r.mu - r.mu);
  if (!r.rationally_dependent) {
    r.clause = MinimalityClause::irrational_ratio;
  } else {
    const double scale = std::max({1.0, std::fabs(r.curvature_down), std::fabs(r.curvature_up)});
    const bool differ = std::fabs(r.curvature_down - r.curvature_up) > std::max(tau, 1e-12) * scale;
    r.clause = differ ? MinimalityClause::second_derivative : MinimalityClause::none;
  }
  return r;
}

bool fires(const EndpointMinimality& e) {
  return e.clause == MinimalityClause::irrational_ratio || e.clause == MinimalityClause::second_derivative;
}

}  // namespace

MinimalityReport minimality_check(const MapFamily& family, std::uint64_t Q, double tau) {
  if (Q == 0 || !(tau >= 0.0)) {
    throw std::invalid_argument("minimality_check: need Q >= 1 and tau >= 0");
  }
  MinimalityReport report;
  report.Q = Q;
  report.tau = tau;
  report.at_zero = check_at_zero(family, Q, tau);
  report.at_zero.endpoint = Endpoint::zero;
  report.at_one = check_at_zero(family.mirrored(), Q, tau);
  report.at_one.endpoint = Endpoint::one;

  if (fires(report.at_zero)) {
    report.verdict = MinimalityVerdict::sufficient_condition_holds;
    report.clause = report.at_zero.clause;
  } else if (fires(report.at_one)) {
    report.verdict = MinimalityVerdict::sufficient_condition_holds;
    report.clause = report.at_one.clause;
  } else if (!report.at_zero.precondition && !report.at_one.precondition) {
    report.clause = MinimalityClause::precondition_failed;
  } else {
    report.clause = MinimalityClause::none;
  }
  return report;
}

}  // namespace skewprod
