#include "skewprod/interval_map.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "skewprod/coordinates.hpp"

namespace skewprod {

namespace {

// Beyond this |logit| the maps are linear at the boundary to double precision.
constexpr double kLinearLogit = 700.0;

double check_unit(double x, const char* what) {
  if (!(x >= -kDomainSlack && x <= 1.0 + kDomainSlack)) {
    throw std::domain_error(std::string(what) + ": argument outside [0,1]: " + std::to_string(x));
  }
  return std::min(1.0, std::max(0.0, x));
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Stable root of r x^2 -/+ ... for x + s r x (1 - x) = y.
double logistic_inverse(double y, double r, double s) {
  const double lead = 1.0 + s * r;
  return 2.0 * y / (lead + std::sqrt(lead * lead - 4.0 * s * r * y));
}

}  // namespace

const char* to_string(MapKind k) {
  switch (k) {
    case MapKind::moebius: return "moebius";
    case MapKind::logistic_perturb: return "logistic";
    case MapKind::damped_moebius: return "damped_moebius";
    case MapKind::inverse: return "inverse";
    case MapKind::mirror: return "mirror";
    case MapKind::composite: return "compose";
  }
  return "?";
}

const char* to_string(Direction d) { return d == Direction::down ? "down" : "up"; }

IntervalMap IntervalMap::moebius(double log_multiplier) {
  if (!std::isfinite(log_multiplier)) {
    throw std::invalid_argument("moebius: log multiplier must be finite");
  }
  IntervalMap m;
  m.kind_ = MapKind::moebius;
  m.p0_ = log_multiplier;
  m.a_ = std::exp(log_multiplier);
  m.b_ = std::expm1(log_multiplier);
  return m;
}

IntervalMap IntervalMap::logistic_perturb(double r, Direction dir) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("logistic: r must be a finite nonnegative number");
  }
  IntervalMap m;
  m.kind_ = MapKind::logistic_perturb;
  m.p0_ = r;
  m.p1_ = dir == Direction::down ? -1.0 : 1.0;
  return m;
}

IntervalMap IntervalMap::damped_moebius(double log_multiplier, double damping) {
  if (!std::isfinite(log_multiplier) || !std::isfinite(damping) || damping < 0.0 || damping >= 1.0) {
    throw std::invalid_argument("damped_moebius: need finite log multiplier and damping in [0,1)");
  }
  IntervalMap m;
  m.kind_ = MapKind::damped_moebius;
  m.p0_ = log_multiplier;
  m.p1_ = damping;
  m.a_ = std::exp(log_multiplier);
  m.b_ = std::expm1(log_multiplier);
  return m;
}

IntervalMap IntervalMap::composite(std::vector<IntervalMap> parts) {
  if (parts.empty()) {
    throw std::invalid_argument("compose: at least one part required");
  }
  IntervalMap m;
  m.kind_ = MapKind::composite;
  m.parts_ = std::make_shared<const std::vector<IntervalMap>>(std::move(parts));
  return m;
}

IntervalMap IntervalMap::inverted() const {
  if (kind_ == MapKind::inverse) {
    return (*parts_)[0];
  }
  if (kind_ == MapKind::moebius) {
    return moebius(-p0_);
  }
  IntervalMap m;
  m.kind_ = MapKind::inverse;
  m.parts_ = std::make_shared<const std::vector<IntervalMap>>(std::vector<IntervalMap>{*this});
  return m;
}

IntervalMap IntervalMap::mirrored() const {
  if (kind_ == MapKind::mirror) {
    return (*parts_)[0];
  }
  IntervalMap m;
  m.kind_ = MapKind::mirror;
  m.parts_ = std::make_shared<const std::vector<IntervalMap>>(std::vector<IntervalMap>{*this});
  return m;
}

std::vector<double> IntervalMap::params() const {
  switch (kind_) {
    case MapKind::moebius: return {p0_};
    case MapKind::logistic_perturb:
    case MapKind::damped_moebius: return {p0_, p1_};
    default: return {};
  }
}

std::span<const IntervalMap> IntervalMap::parts() const {
  if (!parts_) {
    return {};
  }
  return {parts_->data(), parts_->size()};
}

Direction IntervalMap::direction() const {
  switch (kind_) {
    case MapKind::moebius: return p0_ < 0.0 ? Direction::down : Direction::up;
    case MapKind::logistic_perturb: return p1_ < 0.0 ? Direction::down : Direction::up;
    default: return eval_logit(0.0) < 0.0 ? Direction::down : Direction::up;
  }
}

std::string IntervalMap::expression() const {
  switch (kind_) {
    case MapKind::moebius: return "moebius(" + format_real(p0_) + ")";
    case MapKind::logistic_perturb:
      return "logistic(" + format_real(p0_) + "," + (p1_ < 0 ? "down" : "up") + ")";
    case MapKind::damped_moebius:
      return "damped_moebius(" + format_real(p0_) + "," + format_real(p1_) + ")";
    case MapKind::inverse: return "inverse(" + (*parts_)[0].expression() + ")";
    case MapKind::mirror: return "mirror(" + (*parts_)[0].expression() + ")";
    case MapKind::composite: {
      std::string s = "compose(";
      for (std::size_t i = 0; i < parts_->size(); ++i) {
        if (i > 0) s += ",";
        s += (*parts_)[i].expression();
      }
      return s + ")";
    }
  }
  return {};
}

double IntervalMap::eval(double x) const {
  x = check_unit(x, "eval");
  if (x == 0.0 || x == 1.0) {
    return x;
  }
  double y = 0.0;
  switch (kind_) {
    case MapKind::moebius:
      y = a_ * x / (1.0 + b_ * x);
      break;
    case MapKind::logistic_perturb:
      y = x + p1_ * p0_ * x * (1.0 - x);
      break;
    case MapKind::damped_moebius:
      y = a_ * x / (1.0 + b_ * x) * (1.0 - p1_ * x * (1.0 - x));
      break;
    case MapKind::inverse:
      return (*parts_)[0].inverse_eval(x);
    case MapKind::mirror:
      return 1.0 - (*parts_)[0].eval(1.0 - x);
    case MapKind::composite:
      y = x;
      for (const auto& p : *parts_) y = p.eval(y);
      return y;
  }
  return std::min(1.0, std::max(0.0, y));
}

double IntervalMap::derivative(double x) const {
  x = check_unit(x, "derivative");
  switch (kind_) {
    case MapKind::moebius: {
      const double d = 1.0 + b_ * x;
      return a_ / (d * d);
    }
    case MapKind::logistic_perturb:
      return 1.0 + p1_ * p0_ * (1.0 - 2.0 * x);
    case MapKind::damped_moebius: {
      const double d = 1.0 + b_ * x;
      const double g = a_ * x / d;
      const double g1 = a_ / (d * d);
      const double c = p1_;
      return g1 * (1.0 - c * x * (1.0 - x)) - g * c * (1.0 - 2.0 * x);
    }
    case MapKind::inverse: {
      const auto& f = (*parts_)[0];
      return 1.0 / f.derivative(f.inverse_eval(x));
    }
    case MapKind::mirror:
      return (*parts_)[0].derivative(1.0 - x);
    case MapKind::composite: {
      double v = x;
      double d = 1.0;
      for (const auto& p : *parts_) {
        d *= p.derivative(v);
        v = p.eval(v);
      }
      return d;
    }
  }
  return 0.0;
}

double IntervalMap::second_derivative(double x) const {
  x = check_unit(x, "second_derivative");
  switch (kind_) {
    case MapKind::moebius: {
      const double d = 1.0 + b_ * x;
      return -2.0 * a_ * b_ / (d * d * d);
    }
    case MapKind::logistic_perturb:
      return -2.0 * p1_ * p0_;
    case MapKind::damped_moebius: {
      const double d = 1.0 + b_ * x;
      const double g = a_ * x / d;
      const double g1 = a_ / (d * d);
      const double g2 = -2.0 * a_ * b_ / (d * d * d);
      const double c = p1_;
      const double p = c * x * (1.0 - x);
      const double p1 = c * (1.0 - 2.0 * x);
      const double p2 = -2.0 * c;
      return g2 * (1.0 - p) - 2.0 * g1 * p1 - g * p2;
    }
    case MapKind::inverse: {
      const auto& f = (*parts_)[0];
      const double z = f.inverse_eval(x);
      const double d1 = f.derivative(z);
      return -f.second_derivative(z) / (d1 * d1 * d1);
    }
    case MapKind::mirror:
      return -(*parts_)[0].second_derivative(1.0 - x);
    case MapKind::composite: {
      double v = x;
      double d1 = 1.0;
      double d2 = 0.0;
      for (const auto& p : *parts_) {
        const double g1 = p.derivative(v);
        d2 = p.second_derivative(v) * d1 * d1 + g1 * d2;
        d1 *= g1;
        v = p.eval(v);
      }
      return d2;
    }
  }
  return 0.0;
}

double IntervalMap::inverse_eval(double y) const {
  y = check_unit(y, "inverse_eval");
  if (y == 0.0 || y == 1.0) {
    return y;
  }
  switch (kind_) {
    case MapKind::moebius:
      return y / (a_ - b_ * y);
    case MapKind::logistic_perturb:
      return std::min(1.0, logistic_inverse(y, p0_, p1_));
    case MapKind::damped_moebius:
      return logistic(damped_inverse_logit(logit(y)));
    case MapKind::inverse:
      return (*parts_)[0].eval(y);
    case MapKind::mirror:
      return 1.0 - (*parts_)[0].inverse_eval(1.0 - y);
    case MapKind::composite: {
      double v = y;
      for (auto it = parts_->rbegin(); it != parts_->rend(); ++it) v = it->inverse_eval(v);
      return v;
    }
  }
  return y;
}

double IntervalMap::eval_log(double u) const {
  if (u > kDomainSlack || std::isnan(u)) {
    throw std::domain_error("eval_log: log coordinate must be <= 0");
  }
  u = std::min(u, 0.0);
  if (u == 0.0 || std::isinf(u)) {
    return u;
  }
  switch (kind_) {
    case MapKind::moebius:
      return p0_ + u - std::log1p(b_ * std::exp(u));
    case MapKind::logistic_perturb:
      return u + std::log1p(p1_ * p0_ * -std::expm1(u));
    case MapKind::damped_moebius: {
      const double x = std::exp(u);
      const double xc = -std::expm1(u);
      return p0_ + u - std::log1p(b_ * x) + std::log1p(-p1_ * x * xc);
    }
    default:
      return std::min(0.0, log_from_logit(eval_logit(logit_from_log(u))));
  }
}

double IntervalMap::damped_logit_increment(double x, double xc) const {
  const double c = p1_;
  return p0_ + std::log1p(-c * x * xc) - std::log1p(a_ * c * x * x);
}

// d logit(f) / d logit(x) at the point (x, 1 - x).
double IntervalMap::damped_logit_slope(double x, double xc) const {
  const double c = p1_;
  const double d = 1.0 + b_ * x;
  const double g1 = a_ / (d * d);
  const double fp = g1 * (1.0 - c * x * xc) - a_ * x / d * c * (xc - x);
  return fp * d * d / (a_ * (1.0 - c * x * xc) * (1.0 + a_ * c * x * x));
}

double IntervalMap::damped_inverse_logit(double y) const {
  if (!std::isfinite(y)) {
    return y;
  }
  if (y < -kLinearLogit) {
    return y - log_derivative_at(Endpoint::zero);
  }
  if (y > kLinearLogit) {
    return y + log_derivative_at(Endpoint::one);
  }
  // The logit increment lies in [la + ln(1 - c/4) - ln(1 + a c), la].
  const double c = p1_;
  double lo = y - p0_ - 1e-9;
  double hi = y - p0_ - std::log1p(-0.25 * c) + std::log1p(a_ * c) + 1e-9;
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double x = logistic(z);
    const double xc = logistic_complement(z);
    const double phi = z + damped_logit_increment(x, xc) - y;
    if (phi > 0) {
      hi = z;
    } else {
      lo = z;
    }
    const double slope = damped_logit_slope(x, xc);
    double next = z - phi / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) {
      next = 0.5 * (lo + hi);
    }
    const double step = std::fabs(next - z);
    z = next;
    if (step <= 1e-15 * std::max(1.0, std::fabs(z)) || hi - lo <= 1e-15 * std::max(1.0, std::fabs(z))) {
      break;
    }
  }
  return z;
}

double IntervalMap::eval_logit(double y) const {
  if (!std::isfinite(y)) {
    return y;
  }
  switch (kind_) {
    case MapKind::moebius:
      return y + p0_;
    case MapKind::logistic_perturb: {
      const double sr = p1_ * p0_;
      // f = x (1 + sr (1 - x)),  1 - f = (1 - x) (1 - sr x)
      return y + std::log1p(sr * logistic_complement(y)) - std::log1p(-sr * logistic(y));
    }
    case MapKind::damped_moebius:
      return y + damped_logit_increment(logistic(y), logistic_complement(y));
    case MapKind::inverse:
      return (*parts_)[0].inverse_eval_logit(y);
    case MapKind::mirror:
      return -(*parts_)[0].eval_logit(-y);
    case MapKind::composite:
      for (const auto& p : *parts_) y = p.eval_logit(y);
      return y;
  }
  return y;
}

double IntervalMap::inverse_eval_logit(double y) const {
  if (!std::isfinite(y)) {
    return y;
  }
  switch (kind_) {
    case MapKind::moebius:
      return y - p0_;
    case MapKind::logistic_perturb: {
      if (y < -kLinearLogit) {
        return y - log_derivative_at(Endpoint::zero);
      }
      if (y > kLinearLogit) {
        return y + log_derivative_at(Endpoint::one);
      }
      // 1 - f^-1(1 - w) is the inverse of the opposite-sign perturbation.
      const double x = logistic_inverse(logistic(y), p0_, p1_);
      const double xc = logistic_inverse(logistic_complement(y), p0_, -p1_);
      return std::log(x) - std::log(xc);
    }
    case MapKind::damped_moebius:
      return damped_inverse_logit(y);
    case MapKind::inverse:
      return (*parts_)[0].eval_logit(y);
    case MapKind::mirror:
      return -(*parts_)[0].inverse_eval_logit(-y);
    case MapKind::composite:
      for (auto it = parts_->rbegin(); it != parts_->rend(); ++it) y = it->inverse_eval_logit(y);
      return y;
  }
  return y;
}

double IntervalMap::log_derivative_at(Endpoint e) const {
  const bool zero = e == Endpoint::zero;
  switch (kind_) {
    case MapKind::moebius:
      return zero ? p0_ : -p0_;
    case MapKind::logistic_perturb:
      return std::log1p(zero ? p1_ * p0_ : -p1_ * p0_);
    case MapKind::damped_moebius:
      return zero ? p0_ : std::log(std::exp(-p0_) + p1_);
    case MapKind::inverse:
      return -(*parts_)[0].log_derivative_at(e);
    case MapKind::mirror:
      return (*parts_)[0].log_derivative_at(zero ? Endpoint::one : Endpoint::zero);
    case MapKind::composite: {
      double s = 0.0;
      for (const auto& p : *parts_) s += p.log_derivative_at(e);
      return s;
    }
  }
  return 0.0;
}

double IntervalMap::derivative_at(Endpoint e) const { return derivative(e == Endpoint::zero ? 0.0 : 1.0); }

double IntervalMap::second_derivative_at(Endpoint e) const {
  return second_derivative(e == Endpoint::zero ? 0.0 : 1.0);
}

bool operator==(const IntervalMap& a, const IntervalMap& b) {
  if (a.kind_ != b.kind_ || a.p0_ != b.p0_ || a.p1_ != b.p1_) {
    return false;
  }
  const auto pa = a.parts();
  const auto pb = b.parts();
  if (pa.size() != pb.size()) {
    return false;
  }
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!(pa[i] == pb[i])) return false;
  }
  return true;
}

const char* to_string(Coordinate c) {
  switch (c) {
    case Coordinate::plain: return "plain";
    case Coordinate::log: return "log";
    case Coordinate::logit: return "logit";
  }
  return "?";
}

double from_plain(double x, Coordinate c) {
  switch (c) {
    case Coordinate::plain: return x;
    case Coordinate::log: return std::log(x);
    case Coordinate::logit: return logit(x);
  }
  return x;
}

double to_plain(double v, Coordinate c) {
  switch (c) {
    case Coordinate::plain: return v;
    case Coordinate::log: return std::exp(v);
    case Coordinate::logit: return logistic(v);
  }
  return v;
}

double to_logit(double v, Coordinate c) {
  switch (c) {
    case Coordinate::plain: return logit(v);
    case Coordinate::log: return logit_from_log(v);
    case Coordinate::logit: return v;
  }
  return v;
}

double from_logit(double y, Coordinate c) {
  switch (c) {
    case Coordinate::plain: return logistic(y);
    case Coordinate::log: return log_from_logit(y);
    case Coordinate::logit: return y;
  }
  return y;
}

}  // namespace skewprod
