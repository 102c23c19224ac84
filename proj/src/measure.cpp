#include "skewprod/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "skewprod/coordinates.hpp"
#include "skewprod/csv.hpp"

namespace skewprod {

BinnedMeasure::BinnedMeasure(std::size_t bins) : bins_(bins, 0.0) {
  if (bins == 0) throw std::invalid_argument("BinnedMeasure: need at least one bin");
}

BinnedMeasure::BinnedMeasure(double atom0, std::vector<double> bins, double atom1)
    : atom0_(atom0), atom1_(atom1), bins_(std::move(bins)) {
  if (bins_.empty()) throw std::invalid_argument("BinnedMeasure: need at least one bin");
}

BinnedMeasure BinnedMeasure::dirac0(std::size_t bins) {
  BinnedMeasure m(bins);
  m.atom0_ = 1.0;
  return m;
}

BinnedMeasure BinnedMeasure::dirac1(std::size_t bins) {
  BinnedMeasure m(bins);
  m.atom1_ = 1.0;
  return m;
}

BinnedMeasure BinnedMeasure::lebesgue(std::size_t bins) {
  BinnedMeasure m(bins);
  std::fill(m.bins_.begin(), m.bins_.end(), 1.0 / static_cast<double>(bins));
  return m;
}

BinnedMeasure BinnedMeasure::boundary_mixture(double s, std::size_t bins) {
  BinnedMeasure m(bins);
  m.atom0_ = s;
  m.atom1_ = 1.0 - s;
  return m;
}

double BinnedMeasure::interior_mass() const { return std::accumulate(bins_.begin(), bins_.end(), 0.0); }

double BinnedMeasure::total_mass() const { return atom0_ + interior_mass() + atom1_; }

namespace {

// Interior mass of (0, t) under within-bin uniformity.
double interior_below(std::span<const double> bins, double t) {
  if (t <= 0.0) return 0.0;
  const std::size_t B = bins.size();
  const double pos = std::min(t, 1.0) * static_cast<double>(B);
  const std::size_t j = std::min(B - 1, static_cast<std::size_t>(pos));
  double s = 0.0;
  for (std::size_t k = 0; k < j; ++k) s += bins[k];
  return s + (pos - static_cast<double>(j)) * bins[j];
}

}  // namespace

double BinnedMeasure::mass_below(double x) const {
  if (x <= 0.0) return 0.0;
  return atom0_ + interior_below(bins_, x) + (x > 1.0 ? atom1_ : 0.0);
}

double BinnedMeasure::mass_above(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return total_mass() - (x == 1.0 ? atom0_ : 0.0);
  return atom1_ + interior_mass() - interior_below(bins_, 1.0 - x);
}

BinnedMeasure BinnedMeasure::mix(double s, const BinnedMeasure& a, const BinnedMeasure& b) {
  if (a.bin_count() != b.bin_count()) throw std::invalid_argument("mix: grids differ");
  BinnedMeasure out(a.bin_count());
  out.atom0_ = s * a.atom0_ + (1.0 - s) * b.atom0_;
  out.atom1_ = s * a.atom1_ + (1.0 - s) * b.atom1_;
  for (std::size_t k = 0; k < a.bin_count(); ++k) out.bins_[k] = s * a.bins_[k] + (1.0 - s) * b.bins_[k];
  return out;
}

// ---------------------------------------------------------------------------

void PushforwardPlan::locate(std::span<const double> pre) {
  const std::size_t B = pre.size() - 1;
  index_.resize(pre.size());
  frac_.resize(pre.size());
  for (std::size_t k = 0; k < pre.size(); ++k) {
    const double pos = std::clamp(pre[k], 0.0, 1.0) * static_cast<double>(B);
    const std::size_t j = std::min(B - 1, static_cast<std::size_t>(pos));
    index_[k] = j;
    frac_[k] = std::clamp(pos - static_cast<double>(j), 0.0, 1.0);
  }
}

PushforwardPlan::PushforwardPlan(const IntervalMap& map, std::size_t bins) {
  std::vector<double> pre(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    pre[k] = map.inverse_eval(static_cast<double>(k) / static_cast<double>(bins));
  }
  pre.front() = 0.0;
  pre.back() = 1.0;
  locate(pre);
}

PushforwardPlan PushforwardPlan::from_preimages(std::span<const double> preimage_edges) {
  if (preimage_edges.size() < 2) throw std::invalid_argument("PushforwardPlan: need at least two edges");
  PushforwardPlan plan;
  plan.locate(preimage_edges);
  return plan;
}

void PushforwardPlan::apply(const BinnedMeasure& m, double weight, BinnedMeasure& out) const {
  const auto bins = m.bins();
  const std::size_t B = bins.size();
  if (index_.size() != B + 1 || out.bin_count() != B) throw std::invalid_argument("PushforwardPlan: grid mismatch");
  std::vector<double> prefix(B + 1, 0.0);
  for (std::size_t k = 0; k < B; ++k) prefix[k + 1] = prefix[k] + bins[k];
  auto cdf = [&](std::size_t e) { return prefix[index_[e]] + frac_[e] * bins[index_[e]]; };

  auto out_bins = out.bins();
  double lo = cdf(0);
  for (std::size_t k = 0; k < B; ++k) {
    const double hi = cdf(k + 1);
    out_bins[k] += weight * std::max(0.0, hi - lo);
    lo = hi;
  }
  out.atom0() += weight * m.atom0();
  out.atom1() += weight * m.atom1();
}

BinnedMeasure pushforward(const BinnedMeasure& m, const IntervalMap& map) {
  BinnedMeasure out(m.bin_count());
  PushforwardPlan(map, m.bin_count()).apply(m, 1.0, out);
  return out;
}

BinnedMeasure transfer(const BinnedMeasure& m, const MapFamily& family) {
  return TransferOperator(family, m.bin_count())(m);
}

TransferOperator::TransferOperator(const MapFamily& family, std::size_t bins)
    : p1_(family.p1), p2_(family.p2), bins_(bins), down_(family.f_down, bins), up_(family.f_up, bins) {}

BinnedMeasure TransferOperator::operator()(const BinnedMeasure& m) const {
  BinnedMeasure out(bins_);
  down_.apply(m, p1_, out);
  up_.apply(m, p2_, out);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double wasserstein1(const BinnedMeasure& a, const BinnedMeasure& b) {
  const std::size_t B = a.bin_count();
  const double w = a.width();
  const auto ba = a.bins();
  const auto bb = b.bins();
  double d_left = a.atom0() - b.atom0();
  double total = 0.0;
  for (std::size_t k = 0; k < B; ++k) {
    const double d_right = d_left + ba[k] - bb[k];
    const double l = std::fabs(d_left);
    const double r = std::fabs(d_right);
    if ((d_left >= 0) == (d_right >= 0)) {
      total += w * 0.5 * (l + r);
    } else {
      total += w * 0.5 * (l * l + r * r) / (l + r);
    }
    d_left = d_right;
  }
  return total;
}

}  // namespace

double distance(const BinnedMeasure& a, const BinnedMeasure& b, Metric metric) {
  if (a.bin_count() != b.bin_count()) throw std::invalid_argument("distance: grids differ");
  if (metric == Metric::bounded_lipschitz) {
    return wasserstein1(a, b);
  }
  double s = std::fabs(a.atom0() - b.atom0()) + std::fabs(a.atom1() - b.atom1());
  const auto ba = a.bins();
  const auto bb = b.bins();
  for (std::size_t k = 0; k < ba.size(); ++k) s += std::fabs(ba[k] - bb[k]);
  return 0.5 * s;
}

KrylovBogolyubovResult krylov_bogolyubov(const BinnedMeasure& m0, const MapFamily& family, std::size_t iterations,
                                         Metric metric) {
  if (iterations == 0) throw std::invalid_argument("krylov_bogolyubov: iterations must be >= 1");
  const std::size_t B = m0.bin_count();
  TransferOperator T(family, B);

  BinnedMeasure sum = m0;
  BinnedMeasure current = m0;
  std::vector<double> residuals;
  residuals.reserve(iterations);
  for (std::size_t n = 1; n <= iterations; ++n) {
    current = T(current);
    // T(avg_n) - avg_n = (T^n m0 - m0) / n
    residuals.push_back(distance(current, m0, metric) / static_cast<double>(n));
    if (n < iterations) {
      sum.atom0() += current.atom0();
      sum.atom1() += current.atom1();
      auto s = sum.bins();
      const auto c = current.bins();
      for (std::size_t k = 0; k < B; ++k) s[k] += c[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(iterations);
  sum.atom0() *= inv;
  sum.atom1() *= inv;
  for (auto& v : sum.bins()) v *= inv;
  return {std::move(sum), std::move(residuals)};
}

// ---------------------------------------------------------------------------

bool ConeParams::valid() const {
  return c > 0.0 && alpha > 0.0 && alpha < 1.0 && q > 0.0 && q < 1.0 && c * std::pow(q, alpha) > 1.0;
}

ConeCheck cone_check(const BinnedMeasure& m, const ConeParams& cone) {
  if (!cone.valid()) throw std::invalid_argument("cone_check: need c q^alpha > 1, alpha and q in (0,1)");
  ConeCheck result;
  auto bound = [&](double x) { return cone.c * std::pow(x, cone.alpha); };
  auto note = [&](double x) {
    result.inside = false;
    if (!result.first_violation || x < *result.first_violation) result.first_violation = x;
  };

  // An atom at an endpoint exceeds c x^alpha for every x below (atom / c)^(1/alpha).
  for (double atom : {m.atom0(), m.atom1()}) {
    if (atom > 0.0) {
      note(0.5 * std::min(cone.q, std::pow(atom / cone.c, 1.0 / cone.alpha)));
    }
  }
  std::vector<double> xs;
  for (std::size_t k = 1; k < m.bin_count() && m.left(k) <= cone.q; ++k) xs.push_back(m.left(k));
  xs.push_back(cone.q);
  for (double x : xs) {
    const double tol = 1e-14;
    if (m.mass_below(x) > bound(x) + tol || m.mass_above(x) > bound(x) + tol) {
      note(x);
      break;
    }
  }
  return result;
}

std::optional<ConeSearch> find_cone(const MapFamily& family, std::size_t bins) {
  const IntervalMap* maps[2] = {&family.f_down, &family.f_up};
  const double probs[2] = {family.p1, family.p2};
  double rho0[2], rho1[2];
  for (int i = 0; i < 2; ++i) {
    rho0[i] = std::exp(maps[i]->log_derivative_at(Endpoint::zero));
    rho1[i] = std::exp(maps[i]->log_derivative_at(Endpoint::one));
  }
  const double rho_min = std::min({rho0[0], rho0[1], rho1[0], rho1[1]});

  auto contraction = [&](const double* rho, double alpha, double delta) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i) s += probs[i] * std::pow(rho[i] - delta, -alpha);
    return s;
  };
  // f_i^-1(x) <= x / (rho_i - delta) for all sample points x <= q, at both ends.
  auto preimage_bound_holds = [&](double q, double delta) {
    std::vector<double> xs;
    for (std::size_t k = 1; k <= bins && static_cast<double>(k) / static_cast<double>(bins) <= q; ++k) {
      xs.push_back(static_cast<double>(k) / static_cast<double>(bins));
    }
    for (int m = 0; m <= 80; ++m) xs.push_back(std::ldexp(q, -m));
    for (double x : xs) {
      const double lx = logit(x);
      for (int i = 0; i < 2; ++i) {
        const double pre0 = logistic(maps[i]->inverse_eval_logit(lx));
        const double pre1 = logistic_complement(maps[i]->inverse_eval_logit(-lx));
        if (pre0 > x / (rho0[i] - delta) || pre1 > x / (rho1[i] - delta)) return false;
      }
    }
    return true;
  };

  for (double alpha : {0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.005}) {
    for (double frac : {0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.001}) {
      const double delta = frac * rho_min;
      const double s0 = contraction(rho0, alpha, delta);
      const double s1 = contraction(rho1, alpha, delta);
      if (!(s0 < 1.0 && s1 < 1.0)) continue;
      for (int j = 1; j <= 40; ++j) {
        const double q = std::ldexp(1.0, -j);
        if (preimage_bound_holds(q, delta)) {
          ConeSearch out;
          out.cone = {2.0 * std::pow(q, -alpha), alpha, q};
          out.delta = delta;
          out.contraction_zero = s0;
          out.contraction_one = s1;
          return out;
        }
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

BinnedMeasure noisy_transfer(const BinnedMeasure& m, const MapFamily& family, double epsilon,
                             std::size_t quadrature_nodes) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("noisy_transfer: epsilon must be in (0,1)");
  if (quadrature_nodes < 2) throw std::invalid_argument("noisy_transfer: need at least 2 quadrature nodes");
  const std::size_t B = m.bin_count();
  const auto bins = m.bins();
  std::vector<double> prefix(B + 1, 0.0);
  for (std::size_t k = 0; k < B; ++k) prefix[k + 1] = prefix[k] + bins[k];
  auto interior_cdf = [&](double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return prefix[B];
    const double pos = t * static_cast<double>(B);
    const std::size_t j = std::min(B - 1, static_cast<std::size_t>(pos));
    return prefix[j] + (pos - static_cast<double>(j)) * bins[j];
  };

  BinnedMeasure out(B);
  auto out_bins = out.bins();
  std::vector<double> cdf(B + 1);
  const IntervalMap* maps[2] = {&family.f_down, &family.f_up};
  const double probs[2] = {family.p1, family.p2};
  for (int i = 0; i < 2; ++i) {
    for (std::size_t node = 0; node < quadrature_nodes; ++node) {
      const double zeta = (static_cast<double>(node) + 0.5) / static_cast<double>(quadrature_nodes);
      const double lo_image = zeta * epsilon;                 // image of 0
      const double hi_image = 1.0 - epsilon + zeta * epsilon;  // image of 1
      for (std::size_t k = 0; k <= B; ++k) {
        const double b = static_cast<double>(k) / static_cast<double>(B);
        double c = 0.0;
        if (b > lo_image) c += m.atom0();
        if (b > hi_image) c += m.atom1();
        const double arg = (b - lo_image) / (1.0 - epsilon);
        if (arg >= 1.0) {
          c += prefix[B];
        } else if (arg > 0.0) {
          c += interior_cdf(maps[i]->inverse_eval(arg));
        }
        cdf[k] = c;
      }
      const double w = probs[i] / static_cast<double>(quadrature_nodes);
      for (std::size_t k = 0; k < B; ++k) out_bins[k] += w * std::max(0.0, cdf[k + 1] - cdf[k]);
    }
  }
  return out;
}

double lyapunov_vs_measure(const MapFamily& family, const BinnedMeasure& m) {
  const IntervalMap* maps[2] = {&family.f_down, &family.f_up};
  const double probs[2] = {family.p1, family.p2};
  const auto bins = m.bins();
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    double s = 0.0;
    if (m.atom0() > 0.0) s += m.atom0() * maps[i]->log_derivative_at(Endpoint::zero);
    if (m.atom1() > 0.0) s += m.atom1() * maps[i]->log_derivative_at(Endpoint::one);
    for (std::size_t k = 0; k < bins.size(); ++k) {
      if (bins[k] > 0.0) s += bins[k] * std::log(maps[i]->derivative(0.5 * (m.left(k) + m.right(k))));
    }
    total += probs[i] * s;
  }
  return total;
}

double relative_entropy(const BinnedMeasure& m1, const BinnedMeasure& m2) {
  if (m1.bin_count() != m2.bin_count()) throw std::invalid_argument("relative_entropy: grids differ");
  double h = 0.0;
  auto term = [&](double a, double b) {
    if (a <= 0.0) return;
    if (b <= 0.0) {
      h = std::numeric_limits<double>::infinity();
      return;
    }
    h += a * std::log(a / b);
  };
  term(m1.atom0(), m2.atom0());
  term(m1.atom1(), m2.atom1());
  const auto b1 = m1.bins();
  const auto b2 = m2.bins();
  for (std::size_t k = 0; k < b1.size(); ++k) term(b1[k], b2[k]);
  return std::max(0.0, h);
}

BinnedMeasure pullback_pushforward(const BinnedMeasure& m, const MapFamily& family, std::span<const Symbol> past) {
  const std::size_t B = m.bin_count();
  std::vector<double> pre(B + 1);
  pre.front() = 0.0;
  pre.back() = 1.0;
  for (std::size_t k = 1; k < B; ++k) {
    double y = logit(static_cast<double>(k) / static_cast<double>(B));
    for (auto it = past.rbegin(); it != past.rend(); ++it) y = family.map_for(*it).inverse_eval_logit(y);
    pre[k] = logistic(y);
  }
  BinnedMeasure out(B);
  PushforwardPlan::from_preimages(pre).apply(m, 1.0, out);
  return out;
}

void write_measure_csv(std::ostream& os, const BinnedMeasure& m) {
  os << "cell_kind,left,right,mass\n";
  os << "atom0,0,0," << csv::real(m.atom0()) << '\n';
  const auto bins = m.bins();
  for (std::size_t k = 0; k < bins.size(); ++k) {
    os << "bin_" << k << ',' << csv::real(m.left(k)) << ',' << csv::real(m.right(k)) << ',' << csv::real(bins[k])
       << '\n';
  }
  os << "atom1,1,1," << csv::real(m.atom1()) << '\n';
}

}  // namespace skewprod
